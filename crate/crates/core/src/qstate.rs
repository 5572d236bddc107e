//! Dense state vectors and operators over small registers of labeled
//! two-level subsystems.
//!
//! Everything is sized for protocol work, not scale: a register holds at
//! most six qubits, operators are dense complex matrices, and no sparsity
//! or in-place tricks are attempted. Basis states are ordered
//! lexicographically in layout order, with the subsystem listed first
//! carrying the most significant bit of a basis index. Index 0 is the
//! state with every subsystem in its first basis state.

use num_complex::Complex64;
use thiserror::Error;

/// Tolerance for algebraic identities: unitarity, projector laws, norms.
pub const ALGEBRA_TOL: f64 = 1e-12;

/// Tolerance for probability sums and closed-form comparisons.
pub const PROBABILITY_TOL: f64 = 1e-10;

/// Largest register dimension accepted by [`SubsystemLayout`].
pub const MAX_TOTAL_DIM: usize = 64;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Error)]
pub enum StateError {
    #[error("duplicate subsystem label `{0}`")]
    DuplicateLabel(String),
    #[error("subsystem `{label}` has dimension {dim}, only two-level subsystems are supported")]
    BadDimension { label: String, dim: usize },
    #[error("register of {subsystems} subsystems exceeds the {MAX_TOTAL_DIM}-dimensional cap")]
    RegisterTooLarge { subsystems: usize },
    #[error("empty register")]
    EmptyRegister,
    #[error("unknown subsystem label `{0}`")]
    UnknownLabel(String),
    #[error("basis index {index} out of range for two-level subsystem `{label}`")]
    BasisIndexOutOfRange { label: String, index: usize },
    #[error("no basis assignment for subsystem `{0}`")]
    MissingAssignment(String),
    #[error("subsystem `{0}` assigned twice")]
    DuplicateAssignment(String),
    #[error("amplitude vector has length {got}, layout dimension is {expected}")]
    AmplitudeLength { expected: usize, got: usize },
    #[error("states live on different layouts")]
    LayoutMismatch,
    #[error("state is not normalized (norm {0})")]
    NotNormalized(f64),
    #[error("cannot normalize a near-zero vector (norm {0:.3e})")]
    ZeroNorm(f64),
    #[error("cannot superpose an empty list of terms")]
    EmptySuperposition,
    #[error("operator needs at least one target")]
    NoTargets,
    #[error("matrix has {got} entries, expected {expected} for the target dimension")]
    MatrixShape { expected: usize, got: usize },
    #[error("matrix is not unitary (max |U†U - I| = {0:.3e})")]
    NotUnitary(f64),
    #[error("matrix is not an orthogonal projector (max deviation {0:.3e})")]
    NotProjector(f64),
    #[error("operation requires a projector-kind operator")]
    ProjectorRequired,
    #[error("operators in a measurement basis must share one target set")]
    MixedTargets,
    #[error("projectors do not resolve the identity (max deviation {0:.3e})")]
    IncompleteBasis(f64),
    #[error("projectors are not mutually orthogonal (max deviation {0:.3e})")]
    OverlappingProjectors(f64),
    #[error("measurement basis needs at least one outcome")]
    EmptyBasis,
    #[error("cannot renormalize a near-zero measurement branch (probability {0:.3e})")]
    ZeroBranch(f64),
    #[error("no defining pairs given")]
    NoDefiningPairs,
    #[error("{pairs} defining pairs exceed the space dimension {dim}")]
    TooManyPairs { pairs: usize, dim: usize },
    #[error("defining inputs are not orthonormal (max deviation {0:.3e})")]
    InputsNotOrthonormal(f64),
    #[error("defining outputs are not orthonormal (max deviation {0:.3e})")]
    OutputsNotOrthonormal(f64),
}

/// An ordered register of uniquely labeled two-level subsystems.
///
/// The layout fixes the tensor product order and with it the meaning of
/// every basis index. Layouts are cheap to clone and compare.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubsystemLayout {
    labels: Vec<String>,
}

impl SubsystemLayout {
    /// Builds a layout of two-level subsystems from an ordered label list.
    pub fn qubits<I, S>(labels: I) -> Result<Self, StateError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let labels: Vec<String> = labels.into_iter().map(|s| s.as_ref().to_owned()).collect();
        if labels.is_empty() {
            return Err(StateError::EmptyRegister);
        }
        for (i, label) in labels.iter().enumerate() {
            if labels[..i].contains(label) {
                return Err(StateError::DuplicateLabel(label.clone()));
            }
        }
        if 1usize << labels.len() > MAX_TOTAL_DIM {
            return Err(StateError::RegisterTooLarge {
                subsystems: labels.len(),
            });
        }
        Ok(Self { labels })
    }

    /// Number of subsystems.
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Total Hilbert space dimension, `2^len`.
    pub fn total_dim(&self) -> usize {
        1 << self.labels.len()
    }

    /// Labels in tensor order, most significant first.
    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.labels.iter().map(String::as_str)
    }

    pub fn contains(&self, label: &str) -> bool {
        self.position(label).is_some()
    }

    /// Position of a label in the tensor order.
    pub fn position(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Shift amount of the basis-index bit owned by the subsystem at `pos`.
    fn bit(&self, pos: usize) -> usize {
        self.labels.len() - 1 - pos
    }

    /// Basis index of a full assignment `(label, 0 or 1)` of every subsystem.
    ///
    /// With layout `(S, F, W)` the assignment `S=1, F=1, W=0` gives index
    /// `1*4 + 1*2 + 0 = 6`.
    pub fn basis_index(&self, assignment: &[(&str, usize)]) -> Result<usize, StateError> {
        let mut seen = vec![false; self.labels.len()];
        let mut index = 0usize;
        for &(label, value) in assignment {
            let pos = self
                .position(label)
                .ok_or_else(|| StateError::UnknownLabel(label.to_owned()))?;
            if seen[pos] {
                return Err(StateError::DuplicateAssignment(label.to_owned()));
            }
            seen[pos] = true;
            if value > 1 {
                return Err(StateError::BasisIndexOutOfRange {
                    label: label.to_owned(),
                    index: value,
                });
            }
            index |= value << self.bit(pos);
        }
        for (pos, label) in self.labels.iter().enumerate() {
            if !seen[pos] {
                return Err(StateError::MissingAssignment(label.clone()));
            }
        }
        Ok(index)
    }
}

/// A pure state of one register, stored as a dense amplitude vector.
#[derive(Debug, Clone)]
pub struct StateVector {
    layout: SubsystemLayout,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// The computational basis state selected by a full assignment.
    pub fn basis_state(
        layout: &SubsystemLayout,
        assignment: &[(&str, usize)],
    ) -> Result<Self, StateError> {
        let index = layout.basis_index(assignment)?;
        let mut amplitudes = vec![ZERO; layout.total_dim()];
        amplitudes[index] = ONE;
        Ok(Self {
            layout: layout.clone(),
            amplitudes,
        })
    }

    /// Wraps a raw amplitude vector. No normalization is required or applied.
    pub fn from_amplitudes(
        layout: &SubsystemLayout,
        amplitudes: Vec<Complex64>,
    ) -> Result<Self, StateError> {
        if amplitudes.len() != layout.total_dim() {
            return Err(StateError::AmplitudeLength {
                expected: layout.total_dim(),
                got: amplitudes.len(),
            });
        }
        Ok(Self {
            layout: layout.clone(),
            amplitudes,
        })
    }

    /// Linear combination of states on a shared layout.
    ///
    /// With `normalize` set the result is scaled to unit norm and a
    /// near-zero combination is an error; without it the raw, possibly
    /// unnormalized sum is returned as is.
    pub fn superpose(
        terms: &[(Complex64, &StateVector)],
        normalize: bool,
    ) -> Result<Self, StateError> {
        let (_, first) = *terms.first().ok_or(StateError::EmptySuperposition)?;
        let mut amplitudes = vec![ZERO; first.layout.total_dim()];
        for &(coeff, state) in terms {
            if state.layout != first.layout {
                return Err(StateError::LayoutMismatch);
            }
            for (a, &b) in amplitudes.iter_mut().zip(&state.amplitudes) {
                *a += coeff * b;
            }
        }
        let mut state = Self {
            layout: first.layout.clone(),
            amplitudes,
        };
        if normalize {
            let norm = state.norm();
            if norm <= ALGEBRA_TOL {
                return Err(StateError::ZeroNorm(norm));
            }
            for a in &mut state.amplitudes {
                *a /= norm;
            }
        }
        Ok(state)
    }

    /// Tensor product; the other register's labels are appended after ours.
    pub fn tensor(&self, other: &StateVector) -> Result<Self, StateError> {
        let labels: Vec<&str> = self.layout.labels().chain(other.layout.labels()).collect();
        let layout = SubsystemLayout::qubits(labels)?;
        let mut amplitudes = Vec::with_capacity(layout.total_dim());
        for &a in &self.amplitudes {
            for &b in &other.amplitudes {
                amplitudes.push(a * b);
            }
        }
        Ok(Self { layout, amplitudes })
    }

    pub fn layout(&self) -> &SubsystemLayout {
        &self.layout
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// Amplitude of the basis state selected by a full assignment.
    pub fn amplitude(&self, assignment: &[(&str, usize)]) -> Result<Complex64, StateError> {
        Ok(self.amplitudes[self.layout.basis_index(assignment)?])
    }

    /// Euclidean norm.
    pub fn norm(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|a| a.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Unit-norm copy; near-zero vectors are an error.
    pub fn normalized(&self) -> Result<Self, StateError> {
        let norm = self.norm();
        if norm <= ALGEBRA_TOL {
            return Err(StateError::ZeroNorm(norm));
        }
        let mut out = self.clone();
        for a in &mut out.amplitudes {
            *a /= norm;
        }
        Ok(out)
    }

    /// Hermitian inner product, conjugate-linear in `self`.
    pub fn inner_product(&self, other: &StateVector) -> Result<Complex64, StateError> {
        if self.layout != other.layout {
            return Err(StateError::LayoutMismatch);
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Largest entrywise amplitude difference from another state.
    pub fn max_deviation(&self, other: &StateVector) -> Result<f64, StateError> {
        if self.layout != other.layout {
            return Err(StateError::LayoutMismatch);
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }
}

/// How an operator's matrix was validated at construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorKind {
    General,
    Unitary,
    Projector,
}

/// A dense operator acting on an ordered subset of a register's subsystems.
///
/// The matrix is row-major over the target subsystems in the order given,
/// first target most significant, matching the basis convention of
/// [`SubsystemLayout`]. Applying the operator embeds it as identity on all
/// non-target subsystems.
#[derive(Debug, Clone)]
pub struct Operator {
    targets: Vec<String>,
    dim: usize,
    matrix: Vec<Complex64>,
    kind: OperatorKind,
}

impl Operator {
    fn build(
        targets: &[&str],
        matrix: Vec<Complex64>,
        kind: OperatorKind,
    ) -> Result<Self, StateError> {
        if targets.is_empty() {
            return Err(StateError::NoTargets);
        }
        for (i, label) in targets.iter().enumerate() {
            if targets[..i].contains(label) {
                return Err(StateError::DuplicateLabel((*label).to_owned()));
            }
        }
        let dim = 1usize << targets.len();
        if matrix.len() != dim * dim {
            return Err(StateError::MatrixShape {
                expected: dim * dim,
                got: matrix.len(),
            });
        }
        Ok(Self {
            targets: targets.iter().map(|s| (*s).to_owned()).collect(),
            dim,
            matrix,
            kind,
        })
    }

    /// An arbitrary (unchecked) matrix on the given targets.
    pub fn new(targets: &[&str], matrix: Vec<Complex64>) -> Result<Self, StateError> {
        Self::build(targets, matrix, OperatorKind::General)
    }

    /// A matrix checked to satisfy `U†U = I` within [`ALGEBRA_TOL`].
    pub fn unitary(targets: &[&str], matrix: Vec<Complex64>) -> Result<Self, StateError> {
        let op = Self::build(targets, matrix, OperatorKind::Unitary)?;
        let dev = op.unitarity_deviation();
        if dev > ALGEBRA_TOL {
            return Err(StateError::NotUnitary(dev));
        }
        Ok(op)
    }

    /// A matrix checked to be Hermitian and idempotent within [`ALGEBRA_TOL`].
    pub fn projector(targets: &[&str], matrix: Vec<Complex64>) -> Result<Self, StateError> {
        let op = Self::build(targets, matrix, OperatorKind::Projector)?;
        let mut dev = 0.0f64;
        for r in 0..op.dim {
            for c in 0..op.dim {
                let m = op.matrix[r * op.dim + c];
                dev = dev.max((m - op.matrix[c * op.dim + r].conj()).norm());
                let mut sq = ZERO;
                for k in 0..op.dim {
                    sq += op.matrix[r * op.dim + k] * op.matrix[k * op.dim + c];
                }
                dev = dev.max((sq - m).norm());
            }
        }
        if dev > ALGEBRA_TOL {
            return Err(StateError::NotProjector(dev));
        }
        Ok(op)
    }

    /// Identity on the given targets.
    pub fn identity(targets: &[&str]) -> Result<Self, StateError> {
        let dim = 1usize << targets.len();
        let mut matrix = vec![ZERO; dim * dim];
        for i in 0..dim {
            matrix[i * dim + i] = ONE;
        }
        Self::build(targets, matrix, OperatorKind::Unitary)
    }

    /// Rank-one projector onto basis state `index` of a single subsystem.
    pub fn basis_projector(target: &str, index: usize) -> Result<Self, StateError> {
        if index > 1 {
            return Err(StateError::BasisIndexOutOfRange {
                label: target.to_owned(),
                index,
            });
        }
        let mut matrix = vec![ZERO; 4];
        matrix[index * 2 + index] = ONE;
        Self::build(&[target], matrix, OperatorKind::Projector)
    }

    pub fn targets(&self) -> impl Iterator<Item = &str> {
        self.targets.iter().map(String::as_str)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &[Complex64] {
        &self.matrix
    }

    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    /// Max entrywise deviation of `U†U` from the identity.
    pub fn unitarity_deviation(&self) -> f64 {
        let mut dev = 0.0f64;
        for r in 0..self.dim {
            for c in 0..self.dim {
                let mut acc = ZERO;
                for k in 0..self.dim {
                    acc += self.matrix[k * self.dim + r].conj() * self.matrix[k * self.dim + c];
                }
                let expect = if r == c { ONE } else { ZERO };
                dev = dev.max((acc - expect).norm());
            }
        }
        dev
    }

    /// Applies the operator to a state, extending it with the identity on
    /// every subsystem outside the target set.
    pub fn apply(&self, state: &StateVector) -> Result<StateVector, StateError> {
        let layout = &state.layout;
        let n = layout.len();
        let mut shifts = Vec::with_capacity(self.targets.len());
        for label in &self.targets {
            let pos = layout
                .position(label)
                .ok_or_else(|| StateError::UnknownLabel(label.clone()))?;
            shifts.push(layout.bit(pos));
        }
        // Bit mask of the full-register index bits owned by the targets.
        let target_mask: usize = shifts.iter().map(|&b| 1usize << b).sum();
        let t = shifts.len();
        // Scatter an operator sub-index (first target most significant)
        // into full-register index bits.
        let scatter = |sub: usize| -> usize {
            let mut full = 0usize;
            for (i, &bit) in shifts.iter().enumerate() {
                if (sub >> (t - 1 - i)) & 1 == 1 {
                    full |= 1 << bit;
                }
            }
            full
        };
        let full_dim = 1usize << n;
        let mut out = vec![ZERO; full_dim];
        for base in 0..full_dim {
            if base & target_mask != 0 {
                continue;
            }
            for row in 0..self.dim {
                let mut acc = ZERO;
                for col in 0..self.dim {
                    let entry = self.matrix[row * self.dim + col];
                    if entry != ZERO {
                        acc += entry * state.amplitudes[base | scatter(col)];
                    }
                }
                out[base | scatter(row)] = acc;
            }
        }
        Ok(StateVector {
            layout: layout.clone(),
            amplitudes: out,
        })
    }
}

/// A complete set of orthogonal projectors with named outcomes.
#[derive(Debug, Clone)]
pub struct MeasurementBasis {
    name: String,
    outcomes: Vec<(String, Operator)>,
}

impl MeasurementBasis {
    /// Validates that the projectors share a target set, are mutually
    /// orthogonal, and sum to the identity within [`ALGEBRA_TOL`].
    pub fn new(name: &str, outcomes: Vec<(String, Operator)>) -> Result<Self, StateError> {
        let first = match outcomes.first() {
            Some((_, op)) => op,
            None => return Err(StateError::EmptyBasis),
        };
        let targets: Vec<&str> = first.targets().collect();
        let dim = first.dim;
        for (_, op) in &outcomes {
            if op.kind != OperatorKind::Projector {
                return Err(StateError::ProjectorRequired);
            }
            if op.targets().collect::<Vec<_>>() != targets {
                return Err(StateError::MixedTargets);
            }
        }
        let mut overlap = 0.0f64;
        for (i, (_, a)) in outcomes.iter().enumerate() {
            for (_, b) in &outcomes[i + 1..] {
                for r in 0..dim {
                    for c in 0..dim {
                        let mut acc = ZERO;
                        for k in 0..dim {
                            acc += a.matrix[r * dim + k] * b.matrix[k * dim + c];
                        }
                        overlap = overlap.max(acc.norm());
                    }
                }
            }
        }
        if overlap > ALGEBRA_TOL {
            return Err(StateError::OverlappingProjectors(overlap));
        }
        let mut completeness = 0.0f64;
        for r in 0..dim {
            for c in 0..dim {
                let sum: Complex64 = outcomes.iter().map(|(_, op)| op.matrix[r * dim + c]).sum();
                let expect = if r == c { ONE } else { ZERO };
                completeness = completeness.max((sum - expect).norm());
            }
        }
        if completeness > ALGEBRA_TOL {
            return Err(StateError::IncompleteBasis(completeness));
        }
        Ok(Self {
            name: name.to_owned(),
            outcomes,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn outcomes(&self) -> &[(String, Operator)] {
        &self.outcomes
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }
}

/// Born-rule outcome distribution of a normalized state under a basis.
///
/// Returns `(outcome label, probability)` in basis order. Tiny negative
/// values from roundoff are clamped to zero; completeness of the basis was
/// already checked at construction, so the probabilities sum to one within
/// [`PROBABILITY_TOL`].
pub fn born_probabilities(
    state: &StateVector,
    basis: &MeasurementBasis,
) -> Result<Vec<(String, f64)>, StateError> {
    let norm = state.norm();
    if (norm - 1.0).abs() > PROBABILITY_TOL {
        return Err(StateError::NotNormalized(norm));
    }
    let mut out = Vec::with_capacity(basis.outcomes.len());
    for (label, projector) in &basis.outcomes {
        let branch = projector.apply(state)?;
        let p = state.inner_product(&branch)?.re;
        out.push((label.clone(), p.clamp(0.0, 1.0)));
    }
    Ok(out)
}

/// Projects a state onto a measurement branch.
///
/// Returns the branch probability together with the post-measurement
/// state. With `renormalize` set the branch is scaled back to unit norm,
/// which fails on a branch of near-zero probability; without it the raw
/// projected vector is returned.
pub fn project(
    state: &StateVector,
    projector: &Operator,
    renormalize: bool,
) -> Result<(f64, StateVector), StateError> {
    if projector.kind != OperatorKind::Projector {
        return Err(StateError::ProjectorRequired);
    }
    let branch = projector.apply(state)?;
    let p = branch.norm().powi(2);
    if !renormalize {
        return Ok((p, branch));
    }
    if p <= ALGEBRA_TOL {
        return Err(StateError::ZeroBranch(p));
    }
    let scale = p.sqrt();
    let mut amplitudes = branch.amplitudes;
    for a in &mut amplitudes {
        *a /= scale;
    }
    Ok((
        p,
        StateVector {
            layout: branch.layout,
            amplitudes,
        },
    ))
}

/// Which end of the canonical basis supplies complement candidates in
/// [`complete_to_unitary_with_order`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ComplementOrder {
    #[default]
    Ascending,
    Descending,
}

/// Completes a partially specified isometry to a full unitary, extending
/// the defining inputs and outputs with canonical basis vectors in
/// ascending index order. See [`complete_to_unitary_with_order`].
pub fn complete_to_unitary(
    pairs: &[(StateVector, StateVector)],
) -> Result<Operator, StateError> {
    complete_to_unitary_with_order(pairs, ComplementOrder::Ascending)
}

/// Completes `input -> output` defining pairs to a unitary on the pairs'
/// full register.
///
/// Inputs must be orthonormal among themselves, and likewise outputs,
/// within [`PROBABILITY_TOL`]. Both families are extended to full
/// orthonormal bases by Gram-Schmidt over the canonical basis, scanning
/// candidates in the fixed order given by `order`, so the result is
/// deterministic. Any unitary built this way maps each defining input to
/// its defining output exactly; the `order` only changes how the
/// complement is filled in, which is useful for checking that downstream
/// results do not depend on the completion.
pub fn complete_to_unitary_with_order(
    pairs: &[(StateVector, StateVector)],
    order: ComplementOrder,
) -> Result<Operator, StateError> {
    let (first_in, _) = pairs.first().ok_or(StateError::NoDefiningPairs)?;
    let layout = first_in.layout.clone();
    let dim = layout.total_dim();
    if pairs.len() > dim {
        return Err(StateError::TooManyPairs {
            pairs: pairs.len(),
            dim,
        });
    }
    let mut inputs = Vec::with_capacity(dim);
    let mut outputs = Vec::with_capacity(dim);
    for (input, output) in pairs {
        if input.layout != layout || output.layout != layout {
            return Err(StateError::LayoutMismatch);
        }
        inputs.push(input.amplitudes.clone());
        outputs.push(output.amplitudes.clone());
    }
    let dev_in = orthonormality_deviation(&inputs);
    if dev_in > PROBABILITY_TOL {
        return Err(StateError::InputsNotOrthonormal(dev_in));
    }
    let dev_out = orthonormality_deviation(&outputs);
    if dev_out > PROBABILITY_TOL {
        return Err(StateError::OutputsNotOrthonormal(dev_out));
    }
    extend_basis(&mut inputs, dim, order);
    extend_basis(&mut outputs, dim, order);
    // U = sum_k |output_k><input_k|.
    let mut matrix = vec![ZERO; dim * dim];
    for k in 0..dim {
        for r in 0..dim {
            let w = outputs[k][r];
            if w == ZERO {
                continue;
            }
            for c in 0..dim {
                matrix[r * dim + c] += w * inputs[k][c].conj();
            }
        }
    }
    let labels: Vec<&str> = layout.labels().collect();
    Operator::unitary(&labels, matrix)
}

/// Max deviation of a vector family from orthonormality.
fn orthonormality_deviation(vectors: &[Vec<Complex64>]) -> f64 {
    let mut dev = 0.0f64;
    for (i, a) in vectors.iter().enumerate() {
        for (j, b) in vectors.iter().enumerate() {
            let overlap: Complex64 = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
            let expect = if i == j { ONE } else { ZERO };
            dev = dev.max((overlap - expect).norm());
        }
    }
    dev
}

/// Grows an orthonormal family to a full basis with canonical candidates.
///
/// Each candidate is orthogonalized against the family twice (plain
/// Gram-Schmidt applied once can leave noticeable residue when a candidate
/// nearly lies in the span) and accepted when the residual is well away
/// from zero. Candidates inside the span shrink to roundoff size, so the
/// gap between accept and reject is many orders of magnitude wide.
fn extend_basis(vectors: &mut Vec<Vec<Complex64>>, dim: usize, order: ComplementOrder) {
    let candidates: Vec<usize> = match order {
        ComplementOrder::Ascending => (0..dim).collect(),
        ComplementOrder::Descending => (0..dim).rev().collect(),
    };
    for idx in candidates {
        if vectors.len() == dim {
            break;
        }
        let mut v = vec![ZERO; dim];
        v[idx] = ONE;
        for _ in 0..2 {
            for u in vectors.iter() {
                let overlap: Complex64 = u.iter().zip(&v).map(|(x, y)| x.conj() * y).sum();
                for (ve, ue) in v.iter_mut().zip(u) {
                    *ve -= overlap * ue;
                }
            }
        }
        let norm = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-6 {
            for a in &mut v {
                *a /= norm;
            }
            vectors.push(v);
        }
    }
    debug_assert_eq!(vectors.len(), dim, "complement fill must reach full rank");
}
