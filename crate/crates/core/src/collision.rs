//! The seven frequency-collision criteria.
//!
//! Types 1-4 apply to a coupled pair with a designated control; types 5-7
//! apply to two spectator neighbors `j, k` of a common control. A device is
//! collision-free iff no criterion fires anywhere. All criteria depend only
//! on detunings, never on absolute frequencies.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::fabsim::DeviceInstance;
use crate::lattice::{QubitId, Topology};
use crate::Result;

/// Collision windows in GHz. Type 4 is a two-sided strict inequality and has
/// no width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollisionThresholds {
    pub t1: f64,
    pub t2: f64,
    pub t3: f64,
    pub t5: f64,
    pub t6: f64,
    pub t7: f64,
}

impl Default for CollisionThresholds {
    fn default() -> Self {
        CollisionThresholds { t1: 0.017, t2: 0.004, t3: 0.03, t5: 0.017, t6: 0.025, t7: 0.017 }
    }
}

impl CollisionThresholds {
    pub fn validate(&self) -> Result<()> {
        let widths = [self.t1, self.t2, self.t3, self.t5, self.t6, self.t7];
        if widths.iter().any(|w| !w.is_finite() || *w <= 0.0) {
            return Err(Error::InvalidTopology("collision thresholds must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CollisionType {
    Type1 = 1,
    Type2 = 2,
    Type3 = 3,
    Type4 = 4,
    Type5 = 5,
    Type6 = 6,
    Type7 = 7,
}

impl CollisionType {
    pub fn number(self) -> u8 {
        self as u8
    }
}

/// One criterion firing, with the offending detuning and (except type 4) the
/// window it landed in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollisionEvent {
    pub kind: CollisionType,
    /// `[i, j]` for pair criteria, `[control, j, k]` for spectator criteria.
    pub qubits: Vec<QubitId>,
    pub detuning_ghz: f64,
    pub threshold_ghz: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CollisionReport {
    pub events: Vec<CollisionEvent>,
}

impl CollisionReport {
    pub fn is_collision_free(&self) -> bool {
        self.events.is_empty()
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }
}

// Criterion predicates. Each returns the offending detuning when it fires so
// the event and boolean paths cannot drift apart.

#[inline]
fn type1(f_i: f64, f_j: f64, th: &CollisionThresholds) -> Option<f64> {
    let d = (f_i - f_j).abs();
    (d <= th.t1).then_some(d)
}

#[inline]
fn type2(f_c: f64, f_t: f64, alpha: f64, th: &CollisionThresholds) -> Option<f64> {
    let d = (f_c + alpha / 2.0 - f_t).abs();
    (d <= th.t2).then_some(d)
}

#[inline]
fn type3(f_i: f64, f_j: f64, alpha: f64, th: &CollisionThresholds) -> Option<f64> {
    let d = (f_i - (f_j + alpha)).abs().min((f_j - (f_i + alpha)).abs());
    (d <= th.t3).then_some(d)
}

/// Straddling-regime violation: fires unless `f_c + alpha < f_t < f_c`
/// strictly. Boundary detunings count as collisions.
#[inline]
fn type4(f_c: f64, f_t: f64, alpha: f64) -> Option<f64> {
    let inside = f_c + alpha < f_t && f_t < f_c;
    (!inside).then_some(f_t - f_c)
}

#[inline]
fn type5(f_j: f64, f_k: f64, th: &CollisionThresholds) -> Option<f64> {
    let d = (f_j - f_k).abs();
    (d <= th.t5).then_some(d)
}

#[inline]
fn type6(f_j: f64, f_k: f64, alpha: f64, th: &CollisionThresholds) -> Option<f64> {
    let d = (f_j - (f_k + alpha)).abs().min((f_k - (f_j + alpha)).abs());
    (d <= th.t6).then_some(d)
}

#[inline]
fn type7(f_c: f64, f_j: f64, f_k: f64, alpha: f64, th: &CollisionThresholds) -> Option<f64> {
    let d = (2.0 * f_c + alpha - (f_j + f_k)).abs();
    (d <= th.t7).then_some(d)
}

/// Fast-path form of `check_pair`: does any of criteria 1-4 fire?
#[inline]
pub fn pair_collides(f_i: f64, f_j: f64, control_is_i: bool, alpha: f64, th: &CollisionThresholds) -> bool {
    let (f_c, f_t) = if control_is_i { (f_i, f_j) } else { (f_j, f_i) };
    type1(f_i, f_j, th).is_some()
        || type2(f_c, f_t, alpha, th).is_some()
        || type3(f_i, f_j, alpha, th).is_some()
        || type4(f_c, f_t, alpha).is_some()
}

/// Fast-path form of `check_spectators`: does any of criteria 5-7 fire?
#[inline]
pub fn spectators_collide(f_c: f64, f_j: f64, f_k: f64, alpha: f64, th: &CollisionThresholds) -> bool {
    type5(f_j, f_k, th).is_some()
        || type6(f_j, f_k, alpha, th).is_some()
        || type7(f_c, f_j, f_k, alpha, th).is_some()
}

/// Evaluate criteria 1-4 on the coupled pair `(i, j)`.
pub fn check_pair(
    i: QubitId,
    j: QubitId,
    f_i: f64,
    f_j: f64,
    control_is_i: bool,
    alpha: f64,
    th: &CollisionThresholds,
) -> Vec<CollisionEvent> {
    let (f_c, f_t) = if control_is_i { (f_i, f_j) } else { (f_j, f_i) };
    let mut events = Vec::new();
    let mut push = |kind, detuning, threshold| {
        events.push(CollisionEvent { kind, qubits: vec![i, j], detuning_ghz: detuning, threshold_ghz: threshold })
    };
    if let Some(d) = type1(f_i, f_j, th) {
        push(CollisionType::Type1, d, Some(th.t1));
    }
    if let Some(d) = type2(f_c, f_t, alpha, th) {
        push(CollisionType::Type2, d, Some(th.t2));
    }
    if let Some(d) = type3(f_i, f_j, alpha, th) {
        push(CollisionType::Type3, d, Some(th.t3));
    }
    if let Some(d) = type4(f_c, f_t, alpha) {
        push(CollisionType::Type4, d, None);
    }
    events
}

/// Evaluate criteria 5-7 on spectators `j, k` of control `c`.
pub fn check_spectators(
    c: QubitId,
    j: QubitId,
    k: QubitId,
    f_c: f64,
    f_j: f64,
    f_k: f64,
    alpha: f64,
    th: &CollisionThresholds,
) -> Vec<CollisionEvent> {
    let mut events = Vec::new();
    let mut push = |kind, detuning, threshold| {
        events.push(CollisionEvent { kind, qubits: vec![c, j, k], detuning_ghz: detuning, threshold_ghz: threshold })
    };
    if let Some(d) = type5(f_j, f_k, th) {
        push(CollisionType::Type5, d, Some(th.t5));
    }
    if let Some(d) = type6(f_j, f_k, alpha, th) {
        push(CollisionType::Type6, d, Some(th.t6));
    }
    if let Some(d) = type7(f_c, f_j, f_k, alpha, th) {
        push(CollisionType::Type7, d, Some(th.t7));
    }
    events
}

/// Criteria evaluation plan for one topology: the coupled pairs and the
/// spectator triples, precomputed so Monte Carlo batches can reuse them
/// across trials.
#[derive(Debug, Clone)]
pub struct DeviceChecker {
    pairs: Vec<(QubitId, QubitId, bool)>,
    triples: Vec<(QubitId, QubitId, QubitId)>,
}

impl DeviceChecker {
    pub fn new(t: &Topology) -> DeviceChecker {
        let pairs = t.edges().iter().map(|e| (e.a, e.b, e.control == e.a)).collect();
        DeviceChecker { pairs, triples: t.spectator_triples() }
    }

    /// Only the checks that link edges introduce on top of parts that are
    /// already collision-free internally: the link pairs plus every spectator
    /// triple centered on a link-edge control.
    pub fn for_links(t: &Topology) -> DeviceChecker {
        let pairs: Vec<_> = t.link_edges().map(|e| (e.a, e.b, e.control == e.a)).collect();
        let mut controls: Vec<QubitId> = t.link_edges().map(|e| e.control).collect();
        controls.sort_unstable();
        controls.dedup();
        let mut triples = Vec::new();
        for c in controls {
            let nbrs = t.neighbors(c);
            for i in 0..nbrs.len() {
                for j in i + 1..nbrs.len() {
                    triples.push((c, nbrs[i], nbrs[j]));
                }
            }
        }
        DeviceChecker { pairs, triples }
    }

    pub fn is_collision_free(&self, freqs: &[f64], alpha: f64, th: &CollisionThresholds) -> bool {
        for &(a, b, control_is_a) in &self.pairs {
            if pair_collides(freqs[a as usize], freqs[b as usize], control_is_a, alpha, th) {
                return false;
            }
        }
        for &(c, j, k) in &self.triples {
            if spectators_collide(freqs[c as usize], freqs[j as usize], freqs[k as usize], alpha, th) {
                return false;
            }
        }
        true
    }

    pub fn report(&self, freqs: &[f64], alpha: f64, th: &CollisionThresholds) -> CollisionReport {
        let mut events = Vec::new();
        for &(a, b, control_is_a) in &self.pairs {
            events.extend(check_pair(a, b, freqs[a as usize], freqs[b as usize], control_is_a, alpha, th));
        }
        for &(c, j, k) in &self.triples {
            events.extend(check_spectators(c, j, k, freqs[c as usize], freqs[j as usize], freqs[k as usize], alpha, th));
        }
        CollisionReport { events }
    }
}

/// Full criteria evaluation of a sampled device.
pub fn check_device(d: &DeviceInstance, th: &CollisionThresholds) -> Result<CollisionReport> {
    d.validate_frequencies()?;
    let checker = DeviceChecker::new(d.topology());
    Ok(checker.report(d.frequencies(), d.alpha_ghz(), th))
}

/// True when `check_device` finds nothing; short-circuits.
pub fn is_collision_free(d: &DeviceInstance, th: &CollisionThresholds) -> Result<bool> {
    d.validate_frequencies()?;
    let checker = DeviceChecker::new(d.topology());
    Ok(checker.is_collision_free(d.frequencies(), d.alpha_ghz(), th))
}
