use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::eea::TailModel;
use crate::error::{Error, Result};
use crate::io;
use crate::oracles::{EvolutionOracle, Oracle, StatePrep};
use crate::statevec::{DenseUnitary, StateVector};

/// Named instances that need no input files.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Builtin {
    /// `U = I`, `|ψ⟩ = |0⟩`.
    Identity,
    /// `U = X`, `|ψ⟩ = |0⟩`; overlap 0.
    BitFlip,
    /// `U = R_y(2α)`, `|ψ⟩ = |0⟩`; overlap `cos α`.
    Rotation,
    /// `U = diag(1, e^{iφ})`, `|ψ⟩ = |1⟩`; an eigenstate with phase `φ`.
    Phase,
    /// Haar-random two-qubit `U` and state, drawn per trial.
    RandomPair,
    /// 4×4 Hermitian with spectrum uniform in `[−1, 1]` and a random state, drawn per trial.
    RandomHermitian,
    /// As `random-hermitian`, with the state set to one of its eigenvectors.
    RandomEigenstate,
}

/// `[instance]` section: a built-in name or input files.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceSpec {
    pub builtin: Option<Builtin>,
    /// Rotation half-angle for `rotation`; defaults to π/6.
    pub alpha: Option<f64>,
    /// Phase for `phase`; defaults to 1.
    pub phi: Option<f64>,
    pub unitary: Option<PathBuf>,
    pub hamiltonian: Option<PathBuf>,
    pub state: Option<PathBuf>,
}

/// A fully resolved problem instance for one trial.
#[derive(Clone, Debug)]
pub struct Instance {
    pub unitary: Option<Oracle>,
    pub evolution: Option<EvolutionOracle>,
    pub prep: StatePrep,
    /// Tail model used when the config does not give one.
    pub default_tail: Option<TailModel>,
}

/// Instance data loaded once and instantiated per trial.
#[derive(Clone, Debug)]
pub enum InstanceSource {
    Builtin {
        kind: Builtin,
        alpha: f64,
        phi: f64,
    },
    Files {
        unitary: Option<DenseUnitary>,
        evolution: Option<EvolutionOracle>,
        state: StateVector,
    },
}

fn resolve(base: &Path, path: &Path) -> PathBuf {
    if path.is_absolute() {
        path.to_path_buf()
    } else {
        base.join(path)
    }
}

fn load_with_context<T>(path: &Path, load: impl Fn(&Path) -> Result<T>) -> Result<T> {
    load(path).map_err(|e| match e {
        Error::Parse { line, message } => Error::Config(format!("{}:{line}: {message}", path.display())),
        other => Error::Config(format!("{}: {other}", path.display())),
    })
}

impl InstanceSource {
    pub fn from_spec(spec: &InstanceSpec, base_dir: &Path) -> Result<Self> {
        let files = spec.unitary.is_some() || spec.hamiltonian.is_some() || spec.state.is_some();
        match (spec.builtin, files) {
            (Some(_), true) => Err(Error::Config(
                "give either a builtin instance or files, not both".into(),
            )),
            (None, false) => Err(Error::Config("no instance given".into())),
            (Some(kind), false) => Ok(Self::Builtin {
                kind,
                alpha: spec.alpha.unwrap_or(PI / 6.0),
                phi: spec.phi.unwrap_or(1.0),
            }),
            (None, true) => {
                let state_path = spec
                    .state
                    .as_ref()
                    .ok_or_else(|| Error::Config("instance files need a state".into()))?;
                let state_path = resolve(base_dir, state_path);
                let amplitudes = load_with_context(&state_path, io::read_vector)?;
                let state = StateVector::normalized(amplitudes)
                    .map_err(|e| Error::Config(format!("{}: {e}", state_path.display())))?;
                let unitary = match &spec.unitary {
                    Some(p) => {
                        let p = resolve(base_dir, p);
                        let m = load_with_context(&p, io::read_matrix)?;
                        Some(DenseUnitary::new(m).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?)
                    }
                    None => None,
                };
                let evolution = match &spec.hamiltonian {
                    Some(p) => {
                        let p = resolve(base_dir, p);
                        let m: DMatrix<Complex64> = load_with_context(&p, io::read_matrix)?;
                        Some(EvolutionOracle::new(m).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?)
                    }
                    None => None,
                };
                for dim in [unitary.as_ref().map(|u| u.dim()), evolution.as_ref().map(|e| e.dim())]
                    .into_iter()
                    .flatten()
                {
                    if dim != state.dim() {
                        return Err(Error::Config(format!(
                            "operator dimension {dim} does not match state dimension {}",
                            state.dim()
                        )));
                    }
                }
                Ok(Self::Files {
                    unitary,
                    evolution,
                    state,
                })
            }
        }
    }

    /// Draws the instance for one trial; only the random built-ins consume `rng`.
    pub fn instantiate<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Instance> {
        match self {
            Self::Files {
                unitary,
                evolution,
                state,
            } => Ok(Instance {
                unitary: unitary.clone().map(Oracle::unitary),
                default_tail: match evolution {
                    Some(e) => Some(TailModel::from_spectral_bound(e.spectral_radius().max(1e-12))?),
                    None => None,
                },
                evolution: evolution.clone(),
                prep: StatePrep::from_state(state.clone())?,
            }),
            Self::Builtin { kind, alpha, phi } => builtin(*kind, *alpha, *phi, rng),
        }
    }
}

fn unitary_instance(u: DenseUnitary, state: StateVector) -> Result<Instance> {
    Ok(Instance {
        unitary: Some(Oracle::unitary(u)),
        evolution: None,
        prep: StatePrep::from_state(state)?,
        default_tail: None,
    })
}

fn random_hermitian<R: Rng + ?Sized>(rng: &mut R) -> Result<EvolutionOracle> {
    let spectrum: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..=1.0)).collect();
    let basis = DenseUnitary::random(2, rng)?;
    EvolutionOracle::from_spectrum(&spectrum, &basis)
}

fn builtin<R: Rng + ?Sized>(kind: Builtin, alpha: f64, phi: f64, rng: &mut R) -> Result<Instance> {
    match kind {
        Builtin::Identity => unitary_instance(DenseUnitary::identity(1)?, StateVector::zero(1)?),
        Builtin::BitFlip => unitary_instance(DenseUnitary::pauli_x(), StateVector::zero(1)?),
        Builtin::Rotation => unitary_instance(DenseUnitary::ry(2.0 * alpha), StateVector::zero(1)?),
        Builtin::Phase => unitary_instance(DenseUnitary::phase(phi), StateVector::basis(1, 1)?),
        Builtin::RandomPair => {
            let u = DenseUnitary::random(2, rng)?;
            unitary_instance(u, StateVector::random(2, rng)?)
        }
        Builtin::RandomHermitian => {
            let evolution = random_hermitian(rng)?;
            Ok(Instance {
                unitary: None,
                evolution: Some(evolution),
                prep: StatePrep::from_state(StateVector::random(2, rng)?)?,
                default_tail: Some(TailModel::from_spectral_bound(1.0)?),
            })
        }
        Builtin::RandomEigenstate => {
            let evolution = random_hermitian(rng)?;
            let column = rng.random_range(0..4);
            let state = StateVector::normalized(evolution.eigenvectors().column(column).iter().copied().collect())?;
            Ok(Instance {
                unitary: None,
                evolution: Some(evolution),
                prep: StatePrep::from_state(state)?,
                default_tail: Some(TailModel::point(1.0)?),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::io::Write;

    #[test]
    fn builtins_have_expected_overlaps() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let spec = InstanceSpec {
            builtin: Some(Builtin::Rotation),
            ..Default::default()
        };
        let inst = InstanceSource::from_spec(&spec, Path::new("."))
            .unwrap()
            .instantiate(&mut rng)
            .unwrap();
        let psi = inst.prep.target_state();
        let y = psi
            .inner_product(&inst.unitary.unwrap().matrix().apply_to(psi).unwrap())
            .unwrap();
        assert!((y.re - (PI / 6.0).cos()).abs() < 1e-12);

        let spec = InstanceSpec {
            builtin: Some(Builtin::RandomHermitian),
            ..Default::default()
        };
        let inst = InstanceSource::from_spec(&spec, Path::new("."))
            .unwrap()
            .instantiate(&mut rng)
            .unwrap();
        assert!(inst.evolution.unwrap().spectral_radius() <= 1.0);
    }

    #[test]
    fn loads_files() {
        let dir = tempfile::tempdir().unwrap();
        let mut f = std::fs::File::create(dir.path().join("z.txt")).unwrap();
        writeln!(f, "2\n1 0\n0 0\n0 0\n-1 0").unwrap();
        let mut f = std::fs::File::create(dir.path().join("psi.txt")).unwrap();
        writeln!(f, "2\n1\n1").unwrap();
        let spec = InstanceSpec {
            hamiltonian: Some("z.txt".into()),
            state: Some("psi.txt".into()),
            ..Default::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let inst = InstanceSource::from_spec(&spec, dir.path())
            .unwrap()
            .instantiate(&mut rng)
            .unwrap();
        let e = inst.evolution.unwrap();
        assert!(e.expectation(inst.prep.target_state()).unwrap().abs() < 1e-12);

        let mut f = std::fs::File::create(dir.path().join("bad.txt")).unwrap();
        writeln!(f, "2\n1 0\noops\n0 0\n-1 0").unwrap();
        let spec = InstanceSpec {
            hamiltonian: Some("bad.txt".into()),
            state: Some("psi.txt".into()),
            ..Default::default()
        };
        match InstanceSource::from_spec(&spec, dir.path()) {
            Err(Error::Config(msg)) => assert!(msg.contains(":3:"), "{msg}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn conflicting_or_missing_instance() {
        assert!(InstanceSource::from_spec(&InstanceSpec::default(), Path::new(".")).is_err());
        let spec = InstanceSpec {
            builtin: Some(Builtin::Identity),
            state: Some("x".into()),
            ..Default::default()
        };
        assert!(InstanceSource::from_spec(&spec, Path::new(".")).is_err());
    }
}
