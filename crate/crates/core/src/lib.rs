pub mod depmodel;
pub mod diagnosis;
pub mod minilang;
pub mod valuemodel;
pub mod faultlab;
pub mod localize;
pub mod cli;
