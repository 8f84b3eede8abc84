//! Simulated Fourier-sampling attack on homomorphic hashes: finite abelian
//! groups, hash families, an exact statevector simulator, the kernel-recovery
//! driver and a brute-force oracle to check it against.

pub mod arith;
pub mod attack;
pub mod format;
pub mod group;
pub mod hash;
pub mod oracle;
pub mod sim;

pub use attack::{run_attack, AttackConfig, AttackError, AttackReport, AttackStatus, ForgedPair};
pub use format::{InstanceFile, ReportFile, RunConfig};
pub use group::{GroupElement, GroupError, GroupSpec, SubgroupBasis};
pub use hash::{gen_params, FamilyTag, GenRequest, HashError, HomomorphicHash, OutputGroup};
pub use oracle::{kernel_bruteforce, BruteForceResult};
pub use sim::{Backend, SampleTrace, StateVector};

/// Resource bounds for enumeration and statevector simulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Limits {
    /// Largest set the brute-force routines will enumerate.
    pub enumeration: u64,
    /// Largest amplitude vector the simulator will allocate.
    pub statevector: u64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { enumeration: group::DEFAULT_ENUMERATION_LIMIT, statevector: 1 << 20 }
    }
}
