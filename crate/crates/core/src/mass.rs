//! Mass functions (basic probability assignments) over product frames, and
//! the operator algebra: belief/plausibility/commonality, Dempster's rule,
//! marginalization, vacuous extension, conditioning, decombination and
//! anti-conditioning.
//!
//! Masses may be signed (pseudo-belief functions) as long as the commonality
//! function stays non-negative. Every stored function satisfies
//! `sum |m(A)| = 1` and `m(∅) = 0`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::OnceLock;

use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::frames::{extend_bits, project_bits, EventSet, Frame};
use crate::transforms::{
    inv_subset_sums, inv_superset_sums, subset_sums, superset_sums, MAX_LATTICE_CONFIGS,
};

pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// Masses with smaller magnitude are treated as arithmetic noise and dropped.
const NOISE_FLOOR: f64 = 1e-14;

/// Dense combination is used when the sparse pair count would exceed this
/// multiple of the lattice size.
const DENSE_FACTOR: usize = 2;
const DENSE_MAX_CONFIGS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Tolerance(f64);

impl Tolerance {
    pub fn new(value: f64) -> Result<Self> {
        if value > 0.0 && value < 1e-3 {
            Ok(Tolerance(value))
        } else {
            Err(Error::InvalidArgument(format!(
                "tolerance must lie in (0, 1e-3), got {value}"
            )))
        }
    }

    /// Reads `MTE_TOLERANCE`, falling back to the default when unset.
    pub fn from_env() -> Result<Self> {
        match std::env::var("MTE_TOLERANCE") {
            Ok(s) => {
                let v: f64 = s.trim().parse().map_err(|_| {
                    Error::InvalidArgument(format!("MTE_TOLERANCE `{s}` is not a number"))
                })?;
                Tolerance::new(v)
            }
            Err(_) => Ok(Tolerance::default()),
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance(DEFAULT_TOLERANCE)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MassKind {
    Proper,
    Pseudo,
}

#[derive(Clone)]
pub struct MassFunction {
    frame: Frame,
    focal: BTreeMap<Bits, f64>,
    kind: MassKind,
    tol: Tolerance,
}

impl fmt::Debug for MassFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut m = f.debug_map();
        for (set, v) in self.focal_elements() {
            m.entry(&set.to_string(), &v);
        }
        m.finish()
    }
}

fn lattice_fits(frame: &Frame) -> bool {
    frame.size() <= MAX_LATTICE_CONFIGS
}

fn require_lattice(frame: &Frame) -> Result<()> {
    if lattice_fits(frame) {
        Ok(())
    } else {
        Err(Error::FrameTooLarge {
            size: 1u128 << frame.size().min(127),
            cap: 1 << MAX_LATTICE_CONFIGS,
        })
    }
}

impl MassFunction {
    /// Builds a mass function from explicit assignments. Repeated sets are
    /// summed. The assignment must already be normalized.
    pub fn new(
        frame: &Frame,
        entries: impl IntoIterator<Item = (EventSet, f64)>,
        tol: Tolerance,
    ) -> Result<Self> {
        let mut focal = BTreeMap::new();
        for (set, v) in entries {
            if set.frame() != frame {
                return Err(Error::FrameMismatch);
            }
            if !v.is_finite() {
                return Err(Error::InvalidMass(format!("mass {v} on {set}")));
            }
            if set.is_empty() {
                if v != 0.0 {
                    return Err(Error::InvalidMass("mass on the empty set".into()));
                }
                continue;
            }
            *focal.entry(set.bits).or_insert(0.0) += v;
        }
        focal.retain(|_, v: &mut f64| *v != 0.0);
        let total: f64 = focal.values().map(|v| v.abs()).sum();
        if (total - 1.0).abs() > tol.value() {
            return Err(Error::InvalidMass(format!(
                "absolute masses sum to {total}, not 1"
            )));
        }
        Self::finish(frame.clone(), focal, tol)
    }

    /// Convenience constructor from event texts, e.g. `[("{(x1,*)}", 0.4), ("*", 0.6)]`.
    pub fn from_events(frame: &Frame, entries: &[(&str, f64)]) -> Result<Self> {
        let parsed = entries
            .iter()
            .map(|(t, v)| Ok((EventSet::parse(t, frame)?, *v)))
            .collect::<Result<Vec<_>>>()?;
        MassFunction::new(frame, parsed, Tolerance::default())
    }

    pub fn vacuous(frame: &Frame) -> Self {
        let mut focal = BTreeMap::new();
        focal.insert(Bits::ones(frame.size()), 1.0);
        MassFunction {
            frame: frame.clone(),
            focal,
            kind: MassKind::Proper,
            tol: Tolerance::default(),
        }
    }

    /// `m(B) = 1`: the indicator potential of evidence `B`.
    pub fn indicator(evidence: &EventSet) -> Result<Self> {
        if evidence.is_empty() {
            return Err(Error::InvalidArgument("evidence must not be empty".into()));
        }
        let mut focal = BTreeMap::new();
        focal.insert(evidence.bits.clone(), 1.0);
        Ok(MassFunction {
            frame: evidence.frame().clone(),
            focal,
            kind: MassKind::Proper,
            tol: Tolerance::default(),
        })
    }

    /// Bayesian mass function with `probs[i]` on configuration `i`.
    pub fn bayesian(frame: &Frame, probs: &[f64]) -> Result<Self> {
        if probs.len() != frame.size() {
            return Err(Error::InvalidArgument(format!(
                "expected {} probabilities, got {}",
                frame.size(),
                probs.len()
            )));
        }
        if probs.iter().any(|p| *p < 0.0) {
            return Err(Error::InvalidMass("negative probability".into()));
        }
        let entries = probs
            .iter()
            .enumerate()
            .filter(|(_, p)| **p != 0.0)
            .map(|(i, p)| (EventSet::from_indices(frame, [i]), *p));
        MassFunction::new(frame, entries, Tolerance::default())
    }

    /// Normalizes a raw signed assignment and classifies it.
    pub(crate) fn normalized(
        frame: Frame,
        mut focal: BTreeMap<Bits, f64>,
        tol: Tolerance,
    ) -> Result<Self> {
        focal.retain(|k, v| !k.is_zero() && v.abs() > NOISE_FLOOR);
        let total: f64 = focal.values().map(|v| v.abs()).sum();
        if total <= NOISE_FLOOR {
            return Err(Error::TotalConflict);
        }
        for v in focal.values_mut() {
            *v /= total;
        }
        Self::finish(frame, focal, tol)
    }

    fn finish(frame: Frame, focal: BTreeMap<Bits, f64>, tol: Tolerance) -> Result<Self> {
        let kind = if focal.values().all(|&v| v >= -tol.value()) {
            MassKind::Proper
        } else {
            MassKind::Pseudo
        };
        let m = MassFunction {
            frame,
            focal,
            kind,
            tol,
        };
        if kind == MassKind::Pseudo {
            if !lattice_fits(&m.frame) {
                return Err(Error::Unsupported(
                    "pseudo-belief functions need a frame small enough to verify commonality".into(),
                ));
            }
            let q = m.commonality_table()?;
            if let Some(&worst) = q.iter().min_by(|a, b| a.total_cmp(b)) {
                if worst < -tol.value() {
                    return Err(Error::NegativeCommonality { value: worst });
                }
            }
        }
        Ok(m)
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    pub fn kind(&self) -> MassKind {
        self.kind
    }

    pub fn is_proper(&self) -> bool {
        self.kind == MassKind::Proper
    }

    pub fn tolerance(&self) -> Tolerance {
        self.tol
    }

    pub fn with_tolerance(mut self, tol: Tolerance) -> Self {
        self.tol = tol;
        self
    }

    pub fn focal_count(&self) -> usize {
        self.focal.len()
    }

    /// Focal elements in canonical order (ascending bit-vector value).
    pub fn focal_elements(&self) -> impl Iterator<Item = (EventSet, f64)> + '_ {
        self.focal
            .iter()
            .map(|(b, &v)| (EventSet::from_bits(&self.frame, b.clone()), v))
    }

    pub fn mass(&self, set: &EventSet) -> Result<f64> {
        self.check_event(set)?;
        Ok(self.focal.get(&set.bits).copied().unwrap_or(0.0))
    }

    pub fn is_bayesian(&self) -> bool {
        self.focal.keys().all(|b| b.count() == 1)
    }

    pub fn is_vacuous(&self, tol: Tolerance) -> bool {
        let full = Bits::ones(self.frame.size());
        self.focal
            .iter()
            .all(|(b, &v)| if *b == full { (v - 1.0).abs() <= tol.value() } else { v.abs() <= tol.value() })
    }

    fn check_event(&self, set: &EventSet) -> Result<()> {
        if set.frame() == &self.frame {
            Ok(())
        } else {
            Err(Error::FrameMismatch)
        }
    }

    /// `Bel(A) = sum_{B ⊆ A} m(B)`.
    pub fn bel(&self, a: &EventSet) -> Result<f64> {
        self.check_event(a)?;
        Ok(self
            .focal
            .iter()
            .filter(|(b, _)| b.is_subset(&a.bits))
            .map(|(_, v)| v)
            .sum())
    }

    /// `Pl(A) = Bel(Ξ) - Bel(Ξ - A)`; `Bel(Ξ)` is 1 unless masses are signed.
    pub fn pl(&self, a: &EventSet) -> Result<f64> {
        self.check_event(a)?;
        Ok(self
            .focal
            .iter()
            .filter(|(b, _)| b.intersects(&a.bits))
            .map(|(_, v)| v)
            .sum())
    }

    /// `Q(A) = sum_{B ⊇ A} m(B)`.
    pub fn q(&self, a: &EventSet) -> Result<f64> {
        self.check_event(a)?;
        Ok(self
            .focal
            .iter()
            .filter(|(b, _)| a.bits.is_subset(b))
            .map(|(_, v)| v)
            .sum())
    }

    pub fn view(&self) -> Result<BeliefView> {
        BeliefView::new(self.clone())
    }

    /// Masses laid out over the whole subset lattice.
    pub(crate) fn dense_masses(&self) -> Result<Vec<f64>> {
        require_lattice(&self.frame)?;
        let mut t = vec![0.0; 1usize << self.frame.size()];
        for (b, &v) in &self.focal {
            t[b.mask() as usize] += v;
        }
        Ok(t)
    }

    /// `Q` over every subset, indexed by lattice mask.
    pub fn commonality_table(&self) -> Result<Vec<f64>> {
        let mut t = self.dense_masses()?;
        superset_sums(&mut t);
        Ok(t)
    }

    /// `Bel` over every subset, indexed by lattice mask.
    pub fn belief_table(&self) -> Result<Vec<f64>> {
        let mut t = self.dense_masses()?;
        subset_sums(&mut t);
        Ok(t)
    }

    fn from_dense(frame: &Frame, table: &[f64], tol: Tolerance) -> Result<Self> {
        let n = frame.size();
        let focal = table
            .iter()
            .enumerate()
            .skip(1)
            .filter(|(_, v)| v.abs() > NOISE_FLOOR)
            .map(|(mask, &v)| (Bits::from_mask(n, mask as u64), v))
            .collect();
        Self::normalized(frame.clone(), focal, tol)
    }

    /// Brings this function onto `target`, which must hold the same variables
    /// (reordering) or more (vacuous extension).
    pub(crate) fn extend_to(&self, target: &Frame) -> Result<Self> {
        if &self.frame == target {
            return Ok(self.clone());
        }
        let map = target.projection_map(&self.frame)?;
        let focal = self
            .focal
            .iter()
            .map(|(b, &v)| (extend_bits(b, &map, target.size()), v))
            .collect();
        Ok(MassFunction {
            frame: target.clone(),
            focal,
            kind: self.kind,
            tol: self.tol,
        })
    }

    /// Vacuous (cylindrical) extension onto a superframe.
    pub fn vacuous_extend(&self, superframe: &Frame) -> Result<Self> {
        if !self.frame.is_subframe_of(superframe)? {
            let vars = self
                .frame
                .names()
                .filter(|n| !superframe.contains(n))
                .map(String::from)
                .collect();
            return Err(Error::VariableMismatch { vars });
        }
        self.extend_to(superframe)
    }

    /// Projection onto the named variables.
    pub fn marginalize<S: AsRef<str>>(&self, vars: &[S]) -> Result<Self> {
        if vars.is_empty() {
            return Err(Error::InvalidArgument(
                "marginalization needs at least one variable".into(),
            ));
        }
        let sub = self.frame.sub_frame(vars)?;
        self.marginalize_to(&sub)
    }

    /// Projection onto a sub-frame; the unit frame is allowed.
    pub(crate) fn marginalize_to(&self, sub: &Frame) -> Result<Self> {
        if &self.frame == sub {
            return Ok(self.clone());
        }
        let map = self.frame.projection_map(sub)?;
        let mut focal: BTreeMap<Bits, f64> = BTreeMap::new();
        for (b, &v) in &self.focal {
            *focal.entry(project_bits(b, &map, sub.size())).or_insert(0.0) += v;
        }
        Self::normalized(sub.clone(), focal, self.tol)
    }

    /// Dempster's rule with normalization of `sum |m|`. Operands on different
    /// frames are first extended onto the union of their variables.
    pub fn combine(&self, other: &MassFunction) -> Result<Self> {
        let (frame, focal, _) = product(self, other)?;
        Self::normalized(frame, focal, self.tol)
    }

    /// Dempster's rule without normalization; the mass landing on the empty
    /// set is reported as `conflict` instead of being stored.
    pub fn combine_unnormalized(&self, other: &MassFunction) -> Result<UnnormalizedCombination> {
        let (frame, mut focal, conflict) = product(self, other)?;
        focal.retain(|_, v| v.abs() > NOISE_FLOOR);
        Ok(UnnormalizedCombination {
            frame,
            focal,
            conflict,
        })
    }

    /// `m ⊕ m_B` with `m_B(B) = 1`.
    pub fn condition(&self, evidence: &EventSet) -> Result<Self> {
        let indicator = MassFunction::indicator(evidence)?;
        let frame = self.frame.union(evidence.frame())?;
        let b = evidence.extend(&frame)?;
        let pl = self.extend_to(&frame)?.pl(&b)?;
        if pl.abs() < self.tol.value() {
            return Err(Error::TotalConflict);
        }
        self.combine(&indicator)
    }

    /// Decombination `self ⊖ other`: a function `r` with `other ⊕ r = self`,
    /// obtained by dividing commonalities pointwise and inverting.
    pub fn decombine(&self, other: &MassFunction) -> Result<Self> {
        let tol = self.tol.value();
        let frame = self.frame.union(&other.frame)?;
        require_lattice(&frame)?;
        let num = self.extend_to(&frame)?.commonality_table()?;
        let den = other.extend_to(&frame)?.commonality_table()?;
        let mut quotient = vec![0.0; num.len()];
        for a in 1..num.len() {
            if num[a] < -tol || den[a] < -tol {
                return Err(Error::NegativeCommonality {
                    value: num[a].min(den[a]),
                });
            }
            if den[a] > tol {
                quotient[a] = num[a] / den[a];
            } else if num[a] > tol {
                return Err(Error::NotDecombinable(format!(
                    "divisor has zero commonality on {}",
                    EventSet::from_bits(&frame, Bits::from_mask(frame.size(), a as u64))
                )));
            }
        }
        inv_superset_sums(&mut quotient);
        Self::from_dense(&frame, &quotient, self.tol)
    }

    /// Anti-conditioning on `h`: `self ⊖ (self↓h)↑Ξ`. An empty `h` leaves the
    /// function unchanged.
    pub fn anti_condition<S: AsRef<str>>(&self, h: &[S]) -> Result<Self> {
        if h.is_empty() {
            return Ok(self.clone());
        }
        let sub = self.frame.sub_frame(h)?;
        self.anti_condition_on(&sub)
    }

    pub(crate) fn anti_condition_on(&self, sub: &Frame) -> Result<Self> {
        if sub.arity() == 0 {
            return Ok(self.clone());
        }
        let marginal = self.marginalize_to(sub)?.extend_to(&self.frame)?;
        self.decombine(&marginal)
    }

    /// Largest absolute mass difference over the union of focal sets. The
    /// operands must hold the same variables; order may differ.
    pub fn max_abs_diff(&self, other: &MassFunction) -> Result<f64> {
        if !self.frame.same_variables(&other.frame) {
            return Err(Error::FrameMismatch);
        }
        let other = other.extend_to(&self.frame)?;
        let mut worst: f64 = 0.0;
        for (b, &v) in &self.focal {
            worst = worst.max((v - other.focal.get(b).copied().unwrap_or(0.0)).abs());
        }
        for (b, &v) in &other.focal {
            if !self.focal.contains_key(b) {
                worst = worst.max(v.abs());
            }
        }
        Ok(worst)
    }

    pub fn approx_eq(&self, other: &MassFunction, tol: f64) -> bool {
        matches!(self.max_abs_diff(other), Ok(d) if d <= tol)
    }

    pub fn total_abs_mass(&self) -> f64 {
        self.focal.values().map(|v| v.abs()).sum()
    }
}

/// Result of the unnormalized rule: masses summing to `1 - conflict`.
#[derive(Debug, Clone)]
pub struct UnnormalizedCombination {
    frame: Frame,
    focal: BTreeMap<Bits, f64>,
    conflict: f64,
}

impl UnnormalizedCombination {
    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    /// Mass that fell on the empty set and was dropped.
    pub fn conflict(&self) -> f64 {
        self.conflict
    }

    pub fn is_empty(&self) -> bool {
        self.focal.is_empty()
    }

    pub fn mass(&self, set: &EventSet) -> f64 {
        self.focal.get(&set.bits).copied().unwrap_or(0.0)
    }

    pub fn focal_elements(&self) -> impl Iterator<Item = (EventSet, f64)> + '_ {
        self.focal
            .iter()
            .map(|(b, &v)| (EventSet::from_bits(&self.frame, b.clone()), v))
    }

    pub fn normalize(self, tol: Tolerance) -> Result<MassFunction> {
        MassFunction::normalized(self.frame, self.focal, tol)
    }
}

/// Unnormalized intersection product on the common frame; returns the
/// non-empty part and the mass on the empty set.
fn product(m1: &MassFunction, m2: &MassFunction) -> Result<(Frame, BTreeMap<Bits, f64>, f64)> {
    let frame = m1.frame.union(&m2.frame)?;
    let a = m1.extend_to(&frame)?;
    let b = m2.extend_to(&frame)?;
    let pairs = a.focal.len().saturating_mul(b.focal.len());
    if frame.size() <= DENSE_MAX_CONFIGS && pairs > DENSE_FACTOR << frame.size() {
        let mut qa = a.commonality_table()?;
        let qb = b.commonality_table()?;
        for (x, y) in qa.iter_mut().zip(&qb) {
            *x *= y;
        }
        inv_superset_sums(&mut qa);
        let n = frame.size();
        let focal = qa
            .iter()
            .enumerate()
            .skip(1)
            .filter(|(_, v)| **v != 0.0)
            .map(|(mask, &v)| (Bits::from_mask(n, mask as u64), v))
            .collect();
        return Ok((frame, focal, qa[0]));
    }
    let mut acc: HashMap<Bits, f64> = HashMap::with_capacity(pairs.min(1 << 16));
    let mut conflict = 0.0;
    for (x, &u) in &a.focal {
        for (y, &v) in &b.focal {
            let z = x.and(y);
            if z.is_zero() {
                conflict += u * v;
            } else {
                *acc.entry(z).or_insert(0.0) += u * v;
            }
        }
    }
    Ok((frame, acc.into_iter().collect(), conflict))
}

/// Inverts a full commonality table: `m(A) = sum_{B ⊇ A} (-1)^{|B - A|} Q(B)`.
pub fn mass_from_commonality(frame: &Frame, qtable: &[f64], tol: Tolerance) -> Result<MassFunction> {
    require_lattice(frame)?;
    check_table_len(frame, qtable)?;
    let mut m = qtable.to_vec();
    inv_superset_sums(&mut m);
    from_exact_table(frame, &m, tol)
}

/// Inverts a full belief table: `m(A) = sum_{B ⊆ A} (-1)^{|A - B|} Bel(B)`.
pub fn mass_from_belief(frame: &Frame, beltable: &[f64], tol: Tolerance) -> Result<MassFunction> {
    require_lattice(frame)?;
    check_table_len(frame, beltable)?;
    let mut m = beltable.to_vec();
    inv_subset_sums(&mut m);
    from_exact_table(frame, &m, tol)
}

fn check_table_len(frame: &Frame, table: &[f64]) -> Result<()> {
    if table.len() == 1usize << frame.size() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "table has {} entries, lattice has {}",
            table.len(),
            1usize << frame.size()
        )))
    }
}

fn from_exact_table(frame: &Frame, m: &[f64], tol: Tolerance) -> Result<MassFunction> {
    if m[0].abs() > tol.value() {
        return Err(Error::InvalidMass(format!(
            "table implies mass {} on the empty set",
            m[0]
        )));
    }
    let n = frame.size();
    let focal: BTreeMap<Bits, f64> = m
        .iter()
        .enumerate()
        .skip(1)
        .filter(|(_, v)| v.abs() > NOISE_FLOOR)
        .map(|(mask, &v)| (Bits::from_mask(n, mask as u64), v))
        .collect();
    let total: f64 = focal.values().map(|v| v.abs()).sum();
    if (total - 1.0).abs() > tol.value() {
        return Err(Error::InvalidMass(format!(
            "absolute masses sum to {total}, not 1"
        )));
    }
    MassFunction::finish(frame.clone(), focal, tol)
}

/// Full Bel, Pl and Q tables of a mass function, computed on first use.
pub struct BeliefView {
    source: MassFunction,
    bel: OnceLock<Vec<f64>>,
    q: OnceLock<Vec<f64>>,
}

impl BeliefView {
    pub fn new(source: MassFunction) -> Result<Self> {
        require_lattice(source.frame())?;
        Ok(BeliefView {
            source,
            bel: OnceLock::new(),
            q: OnceLock::new(),
        })
    }

    pub fn source(&self) -> &MassFunction {
        &self.source
    }

    pub fn bel_table(&self) -> &[f64] {
        self.bel
            .get_or_init(|| self.source.belief_table().expect("lattice checked"))
    }

    pub fn q_table(&self) -> &[f64] {
        self.q
            .get_or_init(|| self.source.commonality_table().expect("lattice checked"))
    }

    pub fn pl_table(&self) -> Vec<f64> {
        let bel = self.bel_table();
        let full = bel.len() - 1;
        (0..bel.len()).map(|a| bel[full] - bel[full & !a]).collect()
    }

    fn mask(&self, a: &EventSet) -> Result<usize> {
        self.source.check_event(a)?;
        Ok(a.bits.mask() as usize)
    }

    pub fn bel(&self, a: &EventSet) -> Result<f64> {
        Ok(self.bel_table()[self.mask(a)?])
    }

    pub fn pl(&self, a: &EventSet) -> Result<f64> {
        let bel = self.bel_table();
        let full = bel.len() - 1;
        Ok(bel[full] - bel[full & !self.mask(a)?])
    }

    pub fn q(&self, a: &EventSet) -> Result<f64> {
        Ok(self.q_table()[self.mask(a)?])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frames::Variable;

    fn frame(names: &[&str]) -> Frame {
        Frame::new(names.iter().map(|n| {
            Variable::indexed(*n, &n.to_lowercase(), 2).unwrap()
        }))
        .unwrap()
    }

    fn ev(f: &Frame, t: &str) -> EventSet {
        EventSet::parse(t, f).unwrap()
    }

    fn cano_m1() -> MassFunction {
        let f = frame(&["X", "Y"]);
        MassFunction::from_events(
            &f,
            &[
                ("*", 0.1),
                ("{(x1,y1)}", 0.2),
                ("{(x1,y2)}", 0.25),
                ("{(x2,y1)}", 0.3),
                ("{(x2,y2)}", 0.15),
            ],
        )
        .unwrap()
    }

    #[test]
    fn vacuous_transforms() {
        let f = frame(&["X", "Y"]);
        let m = MassFunction::vacuous(&f);
        for mask in 0..16u64 {
            let a = EventSet::from_bits(&f, Bits::from_mask(4, mask));
            let bel = m.bel(&a).unwrap();
            let pl = m.pl(&a).unwrap();
            assert_eq!(bel, if a.is_full() { 1.0 } else { 0.0 });
            assert_eq!(pl, if a.is_empty() { 0.0 } else { 1.0 });
            assert_eq!(m.q(&a).unwrap(), 1.0);
        }
    }

    #[test]
    fn cano_table_transforms() {
        let m = cano_m1();
        let f = m.frame().clone();
        assert_eq!(m.bel(&ev(&f, "{(x1,y1)}")).unwrap(), 0.2);
        assert!((m.q(&ev(&f, "{(x1,y1)}")).unwrap() - 0.3).abs() < 1e-15);
        let view = m.view().unwrap();
        for mask in 0..16u64 {
            let a = EventSet::from_bits(&f, Bits::from_mask(4, mask));
            assert!((view.bel(&a).unwrap() - m.bel(&a).unwrap()).abs() < 1e-15);
            assert!((view.pl(&a).unwrap() - m.pl(&a).unwrap()).abs() < 1e-15);
            assert!((view.q(&a).unwrap() - m.q(&a).unwrap()).abs() < 1e-15);
        }
    }

    #[test]
    fn cano_marginal_on_x() {
        let mx = cano_m1().marginalize(&["X"]).unwrap();
        let fx = mx.frame().clone();
        assert!((mx.mass(&ev(&fx, "{(x1)}")).unwrap() - 0.45).abs() < 1e-15);
        assert!((mx.mass(&ev(&fx, "{(x2)}")).unwrap() - 0.45).abs() < 1e-15);
        assert!((mx.mass(&ev(&fx, "*")).unwrap() - 0.1).abs() < 1e-15);
    }

    #[test]
    fn bayesian_combination() {
        let f = frame(&["X"]);
        let a = MassFunction::bayesian(&f, &[0.3, 0.7]).unwrap();
        let b = MassFunction::bayesian(&f, &[0.6, 0.4]).unwrap();
        let c = a.combine(&b).unwrap();
        assert!((c.mass(&ev(&f, "{(x1)}")).unwrap() - 0.18 / 0.46).abs() < 1e-15);
        assert!((c.mass(&ev(&f, "{(x2)}")).unwrap() - 0.28 / 0.46).abs() < 1e-15);
    }

    #[test]
    fn vacuous_is_identity() {
        let m = cano_m1();
        let v = MassFunction::vacuous(m.frame());
        assert!(m.combine(&v).unwrap().approx_eq(&m, 1e-15));
        let u = v.combine_unnormalized(&m).unwrap();
        assert_eq!(u.conflict(), 0.0);
        for (s, x) in m.focal_elements() {
            assert!((u.mass(&s) - x).abs() < 1e-15);
        }
    }

    #[test]
    fn total_conflict() {
        let f = frame(&["X"]);
        let a = MassFunction::bayesian(&f, &[1.0, 0.0]).unwrap();
        let b = MassFunction::bayesian(&f, &[0.0, 1.0]).unwrap();
        assert_eq!(a.combine(&b).unwrap_err(), Error::TotalConflict);
        let u = a.combine_unnormalized(&b).unwrap();
        assert_eq!(u.conflict(), 1.0);
        assert!(u.is_empty());
        assert_eq!(a.condition(&ev(&f, "{(x2)}")).unwrap_err(), Error::TotalConflict);
    }

    #[test]
    fn conditioning_examples() {
        let f = frame(&["A", "B"]);
        // configurations (a1,b1),(a1,b2),(a2,b1),(a2,b2); a1 = "A true"
        let joint = MassFunction::bayesian(&f, &[0.1, 0.3, 0.2, 0.4]).unwrap();
        let post = joint.condition(&ev(&f, "{(a1,*)}")).unwrap();
        let pb = post.marginalize(&["B"]).unwrap();
        let fb = pb.frame().clone();
        assert!((pb.mass(&ev(&fb, "{(b1)}")).unwrap() - 0.25).abs() < 1e-15);

        let v = MassFunction::vacuous(&f);
        let b = ev(&f, "{(a1,b2),(a2,b1)}");
        assert!(v
            .condition(&b)
            .unwrap()
            .approx_eq(&MassFunction::indicator(&b).unwrap(), 0.0));
        assert!(joint.condition(&f.full_set()).unwrap().approx_eq(&joint, 1e-15));
        assert!(joint.condition(&f.empty_set()).is_err());
    }

    #[test]
    fn extension_examples() {
        let fx = frame(&["X"]);
        let fxy = frame(&["X", "Y"]);
        let v = MassFunction::vacuous(&fx).vacuous_extend(&fxy).unwrap();
        assert!(v.approx_eq(&MassFunction::vacuous(&fxy), 0.0));
        let sure = MassFunction::bayesian(&fx, &[1.0, 0.0]).unwrap();
        let ext = sure.vacuous_extend(&fxy).unwrap();
        assert_eq!(ext.mass(&ev(&fxy, "{(x1,*)}")).unwrap(), 1.0);
        assert!(ext.marginalize(&["X"]).unwrap().approx_eq(&sure, 0.0));
        assert!(matches!(
            ext.vacuous_extend(&fx),
            Err(Error::VariableMismatch { .. })
        ));
    }

    #[test]
    fn marginalize_identity_and_errors() {
        let m = cano_m1();
        assert!(m.marginalize(&["X", "Y"]).unwrap().approx_eq(&m, 0.0));
        assert!(matches!(m.marginalize(&["Q"]), Err(Error::UnknownVariable(_))));
        assert!(m.marginalize::<&str>(&[]).is_err());
    }

    #[test]
    fn commonality_inversion() {
        let f = frame(&["X", "Y"]);
        let ones = vec![1.0; 16];
        let v = mass_from_commonality(&f, &ones, Tolerance::default()).unwrap();
        assert!(v.approx_eq(&MassFunction::vacuous(&f), 0.0));

        let m = cano_m1();
        let back = mass_from_commonality(&f, &m.commonality_table().unwrap(), Tolerance::default())
            .unwrap();
        assert!(back.approx_eq(&m, 1e-15));
        let back = mass_from_belief(&f, &m.belief_table().unwrap(), Tolerance::default()).unwrap();
        assert!(back.approx_eq(&m, 1e-15));
    }

    #[test]
    fn decombination_basics() {
        let m = cano_m1();
        let v = MassFunction::vacuous(m.frame());
        assert!(m.decombine(&v).unwrap().approx_eq(&m, 1e-12));
        // m ⊖ m is vacuous when every commonality is positive
        let f = m.frame().clone();
        let positive = MassFunction::from_events(
            &f,
            &[("*", 0.5), ("{(x1,y1),(x2,y2)}", 0.2), ("{(x1,*)}", 0.3)],
        )
        .unwrap();
        assert!(positive.q(&f.empty_set()).unwrap() > 0.0);
        let r = positive.decombine(&positive).unwrap();
        assert!(r.approx_eq(&MassFunction::vacuous(&f), 1e-12), "{r:?}");
    }

    #[test]
    fn decombination_needs_support() {
        let f = frame(&["X"]);
        let a = MassFunction::from_events(&f, &[("*", 0.5), ("{(x1)}", 0.5)]).unwrap();
        let b = MassFunction::bayesian(&f, &[0.5, 0.5]).unwrap();
        assert!(matches!(a.decombine(&b), Err(Error::NotDecombinable(_))));
    }

    #[test]
    fn anti_conditioning_bayesian() {
        let f = frame(&["A", "B"]);
        let joint = MassFunction::bayesian(&f, &[0.1, 0.3, 0.2, 0.4]).unwrap();
        let c = joint.anti_condition(&["A"]).unwrap();
        // conditional table (0.25, 0.75, 1/3, 2/3), scaled so sum |m| = 1
        let expected = [0.25, 0.75, 1.0 / 3.0, 2.0 / 3.0];
        for (i, p) in expected.iter().enumerate() {
            let got = c.mass(&EventSet::from_indices(&f, [i])).unwrap();
            assert!((got - p / 2.0).abs() < 1e-12, "{i}: {got}");
        }
        assert_eq!(c.focal_count(), 4);
    }

    #[test]
    fn pseudo_constructor_checks_commonality() {
        let f = frame(&["X"]);
        // m({x1}) = 0.6, m({x2}) = 0.6, m(Ξ) = -0.2 is not a pseudo-belief function: Q(Ξ) < 0
        let err = MassFunction::from_events(&f, &[("{(x1)}", 0.5), ("{(x2)}", 0.3), ("*", -0.2)])
            .unwrap_err();
        assert!(matches!(err, Error::NegativeCommonality { .. }));
        let err = MassFunction::from_events(&f, &[("{(x1)}", 0.5)]).unwrap_err();
        assert!(matches!(err, Error::InvalidMass(_)));
    }

    #[test]
    fn tolerance_bounds() {
        assert!(Tolerance::new(0.0).is_err());
        assert!(Tolerance::new(1e-3).is_err());
        assert!(Tolerance::new(1e-6).is_ok());
    }
}
