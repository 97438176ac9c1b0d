//! Kernelized autoregression on point series.

mod general;
mod poly2;
mod problem;

pub use general::{
    band_pair_count, banded_inner_products, general_kernel_solve, gram_via_bands, BandGram, BandTable,
    KernelSolution,
};
pub use poly2::{
    block_matrix, build_poly2_sampler, change_of_basis, estimate_block_norms, poly2_sample_size,
    sample_block_entry, solve_poly2, ChangeOfBasis, Poly2Sample, Poly2Sampler, Poly2Solution,
};
pub use problem::{decode_row, encode_row, Kernel, KernelARProblem, PointSeries, Target, TargetAccess};
