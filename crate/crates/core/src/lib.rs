pub mod arithmetic;
pub mod kam;
pub mod newton;
pub mod operators;
pub mod series;
