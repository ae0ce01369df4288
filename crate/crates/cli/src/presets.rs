use rcd_core::optim::{Algorithm, Selection, TraceLevel};
use rcd_core::problems::ProblemName;

use crate::args::RunArgs;

pub struct Preset {
    pub name: &'static str,
    pub about: &'static str,
    pub args: fn() -> RunArgs,
}

fn base(problem: ProblemName, n: usize, p: usize) -> RunArgs {
    RunArgs {
        problem: Some(problem),
        n: Some(n),
        p: Some(p),
        seed: Some(7),
        trace: Some(TraceLevel::Epoch),
        grad_log: Some(1),
        ..RunArgs::default()
    }
}

pub const PRESETS: &[Preset] = &[
    Preset {
        name: "procrustes-desk",
        about: "St(20,10) Procrustes, cyclic RCD, 500 epochs",
        args: || RunArgs {
            algo: Some(Algorithm::Rcd),
            select: Some(Selection::Cyclic),
            eta: Some(0.125),
            epochs: Some(500),
            ..base(ProblemName::Procrustes, 20, 10)
        },
    },
    Preset {
        name: "procrustes-200-150",
        about: "St(200,150) Procrustes, cyclic RCD",
        args: || RunArgs {
            algo: Some(Algorithm::Rcd),
            select: Some(Selection::Cyclic),
            epochs: Some(50),
            ..base(ProblemName::Procrustes, 200, 150)
        },
    },
    Preset {
        name: "procrustes-200-50",
        about: "St(200,50) Procrustes, cyclic RCD",
        args: || RunArgs {
            algo: Some(Algorithm::Rcd),
            select: Some(Selection::Cyclic),
            epochs: Some(50),
            ..base(ProblemName::Procrustes, 200, 50)
        },
    },
    Preset {
        name: "pca-200-50",
        about: "PCA on St(200,50), condition number 1e3, cyclic RCDlin",
        args: || RunArgs {
            algo: Some(Algorithm::Rcdlin),
            select: Some(Selection::Cyclic),
            cond: Some(1e3),
            epochs: Some(50),
            ..base(ProblemName::Pca, 200, 50)
        },
    },
    Preset {
        name: "symplectic-200",
        about: "Nearest symplectic matrix on Sp(200,200) with block updates",
        args: || RunArgs {
            algo: Some(Algorithm::Rcd),
            block: Some(true),
            eta: Some(0.01),
            epochs: Some(20),
            ..base(ProblemName::NearestSymplectic, 200, 200)
        },
    },
    Preset {
        name: "lorentz-5d",
        about: "5-dimensional Lorentz embeddings of a 200-node tree, time-cyclic RCDlin",
        args: || RunArgs {
            algo: Some(Algorithm::Rcdlin),
            select: Some(Selection::TimeCyclic),
            eta: Some(0.05),
            decay: Some(0.05),
            epochs: Some(100),
            ..base(ProblemName::LorentzEmbed, 5, 200)
        },
    },
    Preset {
        name: "wls-dense-500",
        about: "Weighted least squares, n = p = 500, dense mask, RCDlin with S = np/5",
        args: || RunArgs {
            algo: Some(Algorithm::Rcdlin),
            select: Some(Selection::WithoutReplacement),
            inner: Some(500 * 500 / 5),
            density: Some(1.0),
            epochs: Some(50),
            ..base(ProblemName::WeightedLs, 500, 500)
        },
    },
    Preset {
        name: "wls-sparse-500-100",
        about: "Weighted least squares, n = 500, p = 100, 70% mask, RCDlin with S = np/5",
        args: || RunArgs {
            algo: Some(Algorithm::Rcdlin),
            select: Some(Selection::WithoutReplacement),
            inner: Some(500 * 100 / 5),
            density: Some(0.7),
            epochs: Some(50),
            ..base(ProblemName::WeightedLs, 500, 100)
        },
    },
];

pub fn find(name: &str) -> Option<&'static Preset> {
    PRESETS.iter().find(|p| p.name == name)
}
