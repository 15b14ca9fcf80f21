pub mod evaluate;
pub mod features;
pub mod fuse;
pub mod gmm;
