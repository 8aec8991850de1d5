pub mod ablate;
pub mod benchmark;
pub mod gen_synthetic;
pub mod seqlens;
