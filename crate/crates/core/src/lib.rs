pub mod bch;
pub mod channel;
pub mod codec;
pub mod galois;
pub mod layout;
pub mod rs;
pub mod selftest;
