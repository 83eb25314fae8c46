fn main() {
    println!("embedrank");
}
