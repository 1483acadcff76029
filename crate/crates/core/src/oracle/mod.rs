//! Brute-force ground truth: permanents, hafnians, matching enumeration,
//! partition functions and exact target distributions.

use core::ops::{Add, Mul, Sub};

use num_traits::{One, Zero};

pub mod distribution;
pub mod exact;
pub mod hafnian;
pub mod matchings;
pub mod permanent;
pub mod targets;

pub use distribution::{tv_distance, DistributionTable};
pub use hafnian::{hafnian, hafnian_exact};
pub use matchings::{
    enumerate_matchings, enumerate_perfect_matchings, matching_counts, partition_profile,
    partition_profile_exact, ExactProfile, PartitionProfile,
};
pub use permanent::{permanent, permanent_exact, permanent_naive};
pub use targets::{
    exact_bs_distribution, exact_gadget_distribution, exact_gbs_distribution,
    exact_matching_distribution, exact_pm_distribution,
};

/// The commutative-ring operations the oracles need; implemented for `f64`,
/// machine integers and `BigInt`.
pub trait Scalar:
    Clone + Zero + One + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self>
{
}

impl<T> Scalar for T where
    T: Clone + Zero + One + Add<Output = T> + Sub<Output = T> + Mul<Output = T>
{
}
