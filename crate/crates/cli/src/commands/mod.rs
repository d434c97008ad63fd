pub mod cut_verify;
pub mod gen_data;
pub mod gradcheck;
pub mod simulate;
pub mod train;
