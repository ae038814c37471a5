pub mod catalog;
pub mod expr;
pub mod frontend;
pub mod numeric;
pub mod tensor;
pub mod weyl;
