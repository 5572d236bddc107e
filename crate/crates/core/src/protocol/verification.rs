//! Self-checks of the protocol construction.
//!
//! Each check reduces a claimed identity to a single worst-case
//! deviation so a caller (or the `verify` subcommand) can print one line
//! per claim. Closed-form comparisons run at the caller's tolerance;
//! exact algebraic identities run at the tighter of the caller's
//! tolerance and the library's algebra tolerance, so loosening the
//! tolerance never loosens them and tightening it below float noise
//! makes them fail visibly.

use super::{
    friend_state_after_interaction, initial_state, interaction_defining_pairs,
    interaction_unitary, interaction_unitary_with_order, labels, measurement_unitary,
    repeat_measurement_unitary, verify_closed_forms, wigner_state_after_interaction,
    wigner_state_after_repeat, FriendRecord, ProtocolConfig, ProtocolError,
};
use crate::qstate::{
    project, ComplementOrder, Operator, StateVector, SubsystemLayout, ALGEBRA_TOL,
};
use num_complex::Complex64;

/// One named claim with its observed worst-case deviation.
#[derive(Debug, Clone)]
pub struct VerificationCheck {
    pub name: &'static str,
    pub max_deviation: f64,
    pub tolerance: f64,
}

impl VerificationCheck {
    pub fn passed(&self) -> bool {
        self.max_deviation <= self.tolerance
    }
}

#[derive(Debug, Clone)]
pub struct VerificationReport {
    pub grid_points: usize,
    pub tolerance: f64,
    pub checks: Vec<VerificationCheck>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(VerificationCheck::passed)
    }
}

fn theta_grid(points: usize) -> Result<Vec<f64>, ProtocolError> {
    match points {
        0 => Err(ProtocolError::EmptyGrid),
        1 => Ok(vec![0.0]),
        n => Ok((0..n).map(|i| i as f64 / (n - 1) as f64).collect()),
    }
}

fn sfw_state(entries: &[(usize, f64)]) -> Result<StateVector, ProtocolError> {
    let layout = SubsystemLayout::qubits([
        labels::SYSTEM,
        labels::FRIEND_MEMORY,
        labels::WIGNER_ENVIRONMENT,
    ])?;
    let mut amplitudes = vec![Complex64::new(0.0, 0.0); layout.total_dim()];
    for &(index, value) in entries {
        amplitudes[index] = Complex64::new(value, 0.0);
    }
    Ok(StateVector::from_amplitudes(&layout, amplitudes)?)
}

fn psi1(theta: f64) -> Result<StateVector, ProtocolError> {
    let config = ProtocolConfig::new(theta)?;
    Ok(measurement_unitary().apply(&initial_state(&config)?)?)
}

/// Every protocol state the game can reach, built with an explicit
/// completion order: Ψ₂^W, the two friend branches, and Ψ₄^W.
fn reachable_states(
    theta: f64,
    order: ComplementOrder,
) -> Result<Vec<StateVector>, ProtocolError> {
    let u = interaction_unitary_with_order(theta, order)?;
    let psi1 = psi1(theta)?;
    let psi2w = u.apply(&psi1)?;
    let mut states = Vec::with_capacity(4);
    for record in [FriendRecord::Phi0, FriendRecord::Phi1] {
        let projector = Operator::basis_projector(labels::FRIEND_MEMORY, record.index())?;
        let (_, branch) = project(&psi1, &projector, true)?;
        states.push(u.apply(&branch)?);
    }
    let fp = SubsystemLayout::qubits([labels::REPEAT_MEMORY])?;
    let ready = StateVector::basis_state(&fp, &[(labels::REPEAT_MEMORY, 0)])?;
    states.push(repeat_measurement_unitary().apply(&psi2w.tensor(&ready)?)?);
    states.push(psi2w);
    Ok(states)
}

fn orthonormality_deviation(theta: f64) -> Result<f64, ProtocolError> {
    let pairs = interaction_defining_pairs(theta)?;
    let mut dev = 0.0f64;
    for (input, output) in &pairs {
        dev = dev.max((input.norm() - 1.0).abs());
        dev = dev.max((output.norm() - 1.0).abs());
    }
    dev = dev.max(pairs[0].0.inner_product(&pairs[1].0)?.norm());
    dev = dev.max(pairs[0].1.inner_product(&pairs[1].1)?.norm());
    Ok(dev)
}

fn pair_reproduction_deviation(theta: f64) -> Result<f64, ProtocolError> {
    let u = interaction_unitary(theta)?;
    let mut dev = 0.0f64;
    for (input, output) in interaction_defining_pairs(theta)? {
        dev = dev.max(u.apply(&input)?.max_deviation(&output)?);
    }
    Ok(dev)
}

fn rewriting_deviation_zero_leakage() -> Result<f64, ProtocolError> {
    // Both friend branches at θ = 0, written in the tilted environment
    // basis ω± = (ω₀ ± ω₁)/√2: record φ₀ pairs ↑φ₀ with ω₊, record φ₁
    // swaps the two.
    let tilted0 = sfw_state(&[(0, 0.5), (1, 0.5), (6, 0.5), (7, -0.5)])?;
    let tilted1 = sfw_state(&[(0, 0.5), (1, -0.5), (6, 0.5), (7, 0.5)])?;
    let branch0 = friend_state_after_interaction(0.0, FriendRecord::Phi0)?;
    let branch1 = friend_state_after_interaction(0.0, FriendRecord::Phi1)?;
    let dev0 = branch0.state().max_deviation(&tilted0)?;
    let dev1 = branch1.state().max_deviation(&tilted1)?;
    Ok(dev0.max(dev1))
}

fn zero_leakage_deviation() -> Result<f64, ProtocolError> {
    // At θ = 0 the environment decouples: the global state is Φ⁺ ⊗ ω₀.
    let expected = sfw_state(&[(0, std::f64::consts::FRAC_1_SQRT_2), (6, std::f64::consts::FRAC_1_SQRT_2)])?;
    let psi2 = wigner_state_after_interaction(0.0)?;
    Ok(psi2.state().max_deviation(&expected)?.max(pair_reproduction_deviation(0.0)?))
}

fn full_leakage_deviation() -> Result<f64, ProtocolError> {
    // At θ = 1 each record branch carries its own environment pointer.
    let u = interaction_unitary(1.0)?;
    let up_in = sfw_state(&[(0, 1.0)])?;
    let down_in = sfw_state(&[(6, 1.0)])?;
    let down_out = sfw_state(&[(7, 1.0)])?;
    let mut dev = u.apply(&up_in)?.max_deviation(&up_in)?;
    dev = dev.max(u.apply(&down_in)?.max_deviation(&down_out)?);
    let expected = sfw_state(&[
        (0, std::f64::consts::FRAC_1_SQRT_2),
        (7, std::f64::consts::FRAC_1_SQRT_2),
    ])?;
    dev = dev.max(wigner_state_after_interaction(1.0)?.state().max_deviation(&expected)?);
    Ok(dev)
}

fn ghz_deviation() -> Result<f64, ProtocolError> {
    // Ψ₄^W(0) must have support {(0,0,0,0), (1,1,0,1)} with weight 1/2 each.
    let psi4 = wigner_state_after_repeat(0.0)?;
    let amplitudes = psi4.state().amplitudes();
    let mut dev = 0.0f64;
    for (index, amp) in amplitudes.iter().enumerate() {
        if index == 0 || index == 13 {
            dev = dev.max((amp.norm_sqr() - 0.5).abs());
        } else {
            dev = dev.max(amp.norm());
        }
    }
    Ok(dev)
}

fn record_persistence_deviation(grid: &[f64]) -> Result<f64, ProtocolError> {
    // A collapsed branch never regrows amplitude on the opposite record:
    // components ↑φ₁ and ↓φ₀ (indices 2..=5 on S, F, W) stay empty.
    let mut dev = 0.0f64;
    for &theta in grid {
        for record in [FriendRecord::Phi0, FriendRecord::Phi1] {
            let branch = friend_state_after_interaction(theta, record)?;
            for index in 2..=5 {
                dev = dev.max(branch.state().amplitudes()[index].norm());
            }
        }
    }
    Ok(dev)
}

fn completion_insensitivity_deviation(grid: &[f64]) -> Result<f64, ProtocolError> {
    let mut dev = 0.0f64;
    for &theta in grid {
        let ascending = reachable_states(theta, ComplementOrder::Ascending)?;
        let descending = reachable_states(theta, ComplementOrder::Descending)?;
        for (a, b) in ascending.iter().zip(&descending) {
            dev = dev.max(a.max_deviation(b)?);
        }
    }
    Ok(dev)
}

/// Runs every protocol self-check on a uniform θ grid with `grid_points`
/// samples of [0, 1].
pub fn run_verification(
    grid_points: usize,
    tolerance: f64,
) -> Result<VerificationReport, ProtocolError> {
    let grid = theta_grid(grid_points)?;
    let identity_tol = tolerance.min(ALGEBRA_TOL);
    let mut checks = Vec::new();

    let closed = verify_closed_forms(&grid, tolerance)?;
    let dev_mw = closed.checks.iter().map(|c| c.deviation_mw).fold(0.0, f64::max);
    let dev_mf = closed.checks.iter().map(|c| c.deviation_mf).fold(0.0, f64::max);
    checks.push(VerificationCheck {
        name: "closed_form_wigner_mw",
        max_deviation: dev_mw,
        tolerance,
    });
    checks.push(VerificationCheck {
        name: "closed_form_wigner_mf",
        max_deviation: dev_mf,
        tolerance,
    });

    let mut ortho = 0.0f64;
    let mut reproduction = 0.0f64;
    let mut unitarity = 0.0f64;
    for &theta in &grid {
        ortho = ortho.max(orthonormality_deviation(theta)?);
        reproduction = reproduction.max(pair_reproduction_deviation(theta)?);
        unitarity = unitarity.max(interaction_unitary(theta)?.unitarity_deviation());
    }
    checks.push(VerificationCheck {
        name: "defining_pair_orthonormality",
        max_deviation: ortho,
        tolerance,
    });
    checks.push(VerificationCheck {
        name: "completion_reproduces_pairs",
        max_deviation: reproduction,
        tolerance,
    });
    checks.push(VerificationCheck {
        name: "interaction_unitarity",
        max_deviation: unitarity,
        tolerance: identity_tol,
    });
    checks.push(VerificationCheck {
        name: "rewriting_identity_zero_leakage",
        max_deviation: rewriting_deviation_zero_leakage()?,
        tolerance: identity_tol,
    });
    checks.push(VerificationCheck {
        name: "zero_leakage_endpoint",
        max_deviation: zero_leakage_deviation()?,
        tolerance: identity_tol,
    });
    checks.push(VerificationCheck {
        name: "full_leakage_endpoint",
        max_deviation: full_leakage_deviation()?,
        tolerance: identity_tol,
    });
    checks.push(VerificationCheck {
        name: "ghz_amplitude_structure",
        max_deviation: ghz_deviation()?,
        tolerance: identity_tol,
    });
    checks.push(VerificationCheck {
        name: "record_persistence",
        max_deviation: record_persistence_deviation(&grid)?,
        tolerance: identity_tol,
    });
    checks.push(VerificationCheck {
        name: "completion_insensitivity",
        max_deviation: completion_insensitivity_deviation(&grid)?,
        tolerance: identity_tol,
    });

    Ok(VerificationReport {
        grid_points,
        tolerance,
        checks,
    })
}
