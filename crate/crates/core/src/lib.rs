pub mod catalog;
pub mod constraints;
pub mod engine;
pub mod error;
pub mod ir;
pub mod value;
pub mod provgen;
pub mod hybrid;
pub mod bench;
pub mod explore;
