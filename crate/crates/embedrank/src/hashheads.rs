//! hashheads (placeholder)
