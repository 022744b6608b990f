#![allow(dead_code)]

pub mod instances;
pub mod lp_oracle;
