//! Protocol families: bang-bang, bang-singular-bang, the unconstrained
//! optimum and the quintic polynomial ansatz.
//!
//! Every constructor returns the control u(τ) as a [`Protocol`] together
//! with the matching closed-form [`ScalingTrajectory`].

mod analytic;
mod bang;
mod singular;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use analytic::{polynomial_protocol, unconstrained_protocol};
pub use bang::{bangbang_protocol, bangbang_times, BangBangTimes};
pub use singular::{
    bsb_interval_times, bsb_junctions, bsb_protocol, c1_floor, c1_max, c1_upper, singular_control, solve_c1,
    IntervalTimes, Junctions,
};

use crate::control::{Control, Impulse};
use crate::ermakov::{u_from_b, Curve, ScalingTrajectory};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    BangBang,
    #[serde(rename = "bsb")]
    BangSingularBang,
    Unconstrained,
    Polynomial,
}

impl Family {
    pub const ALL: [Family; 4] = [
        Family::BangBang,
        Family::BangSingularBang,
        Family::Unconstrained,
        Family::Polynomial,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Family::BangBang => "bang-bang",
            Family::BangSingularBang => "bsb",
            Family::Unconstrained => "unconstrained",
            Family::Polynomial => "polynomial",
        }
    }

    /// Whether the family respects |u| ≤ δ.
    pub fn is_bounded(&self) -> bool {
        matches!(self, Family::BangBang | Family::BangSingularBang)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bang-bang" | "bangbang" => Ok(Family::BangBang),
            "bsb" | "bang-singular-bang" => Ok(Family::BangSingularBang),
            "unconstrained" | "euler-lagrange" => Ok(Family::Unconstrained),
            "polynomial" | "poly" => Ok(Family::Polynomial),
            other => Err(Error::Config(format!("unknown protocol family `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SegmentKind {
    BangLow,
    BangHigh,
    Singular,
    Analytic,
}

/// How u is evaluated on a segment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "kebab-case")]
pub enum ControlLaw {
    Constant { value: f64 },
    /// u_s = (1 + c₁²)/(2c₁τ + c₂)² on the arc b² = 2c₁τ + c₂.
    Singular { c1: f64, c2: f64 },
    /// u from the Ermakov equation along a closed-form b(τ).
    FromCurve { curve: Curve },
}

impl ControlLaw {
    pub fn eval(&self, tau: f64) -> f64 {
        match *self {
            ControlLaw::Constant { value } => value,
            ControlLaw::Singular { c1, c2 } => {
                let y = 2.0 * c1 * tau + c2;
                (1.0 + c1 * c1) / (y * y)
            }
            ControlLaw::FromCurve { curve } => {
                let k = curve.eval(tau);
                u_from_b(k.b, k.bddot).unwrap_or(f64::NAN)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlSegment {
    pub kind: SegmentKind,
    pub start: f64,
    pub end: f64,
    #[serde(flatten)]
    pub law: ControlLaw,
}

/// u outside [0, τ_f]: the static initial and final traps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryControl {
    pub before: f64,
    pub after: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImpulseRecord {
    pub tau: f64,
    pub strength: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProtocolMetadata {
    pub min_control: f64,
    pub max_control: f64,
    /// u < 0 somewhere: the trap is inverted for part of the protocol.
    pub expulsive: bool,
    /// For bang-singular-bang: whether u_s stays inside [−δ, δ].
    pub singular_arc_within_bound: Option<bool>,
    /// False for compressions (γ < 1), which are built but not checked.
    pub verified: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Protocol {
    pub family: Family,
    pub gamma: f64,
    /// Control bound; `None` for unbounded families.
    pub delta: Option<f64>,
    pub tau_f: f64,
    pub segments: Vec<ControlSegment>,
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    /// b(τ) = Σ a_j τ^j for the polynomial family.
    pub polynomial: Option<Vec<f64>>,
    pub boundary: BoundaryControl,
    /// Kicks that connect ḃ ≠ 0 endpoints to the static traps.
    #[serde(default)]
    pub impulses: Vec<ImpulseRecord>,
    pub metadata: ProtocolMetadata,
}

/// Samples used to locate control extrema.
const EXTREMA_SAMPLES: usize = 4001;

impl Protocol {
    pub(crate) fn assemble(
        family: Family,
        gamma: f64,
        delta: Option<f64>,
        segments: Vec<ControlSegment>,
        impulses: Vec<ImpulseRecord>,
    ) -> Protocol {
        let tau_f = segments.last().map(|s| s.end).unwrap_or(0.0);
        let mut p = Protocol {
            family,
            gamma,
            delta,
            tau_f,
            segments,
            c1: None,
            c2: None,
            polynomial: None,
            boundary: BoundaryControl {
                before: 1.0,
                after: gamma.powi(-4),
            },
            impulses,
            metadata: ProtocolMetadata {
                min_control: 0.0,
                max_control: 0.0,
                expulsive: false,
                singular_arc_within_bound: None,
                verified: gamma >= 1.0,
            },
        };
        let (lo, hi) = p.control_extrema(EXTREMA_SAMPLES);
        p.metadata.min_control = lo;
        p.metadata.max_control = hi;
        p.metadata.expulsive = lo < 0.0;
        p
    }

    /// Interior switching times (segment starts after the first).
    pub fn switch_times(&self) -> Vec<f64> {
        self.segments.iter().skip(1).map(|s| s.start).collect()
    }

    fn live_segments(&self) -> Vec<&ControlSegment> {
        let live: Vec<_> = self.segments.iter().filter(|s| s.end > s.start).collect();
        if live.is_empty() {
            self.segments.iter().take(1).collect()
        } else {
            live
        }
    }

    /// Min and max of u over segment interiors, including one-sided
    /// limits at segment ends.
    pub fn control_extrema(&self, samples: usize) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for seg in self.live_segments() {
            let n = if seg.end > seg.start {
                ((samples as f64) * (seg.end - seg.start) / self.tau_f.max(f64::MIN_POSITIVE)).ceil() as usize + 2
            } else {
                1
            };
            for k in 0..n {
                let tau = seg.start + (seg.end - seg.start) * k as f64 / (n.max(2) - 1) as f64;
                let u = seg.law.eval(tau);
                lo = lo.min(u);
                hi = hi.max(u);
            }
        }
        (lo, hi)
    }

    /// Max |u| over the protocol.
    pub fn max_abs_control(&self) -> f64 {
        let (lo, hi) = self.control_extrema(EXTREMA_SAMPLES);
        lo.abs().max(hi.abs())
    }

    /// Whether |u| ever exceeds `delta`.
    pub fn exceeds_bound(&self, delta: f64) -> bool {
        self.max_abs_control() > delta * (1.0 + 1e-12)
    }

    /// Checks that the segments tile [0, τ_f] without gaps or overlaps.
    pub fn check_tiling(&self) -> Result<()> {
        let Some(first) = self.segments.first() else {
            return Err(Error::Contract("protocol has no segments".into()));
        };
        if first.start != 0.0 {
            return Err(Error::Contract(format!("first segment starts at {}", first.start)));
        }
        for (i, s) in self.segments.iter().enumerate() {
            if !(s.end >= s.start) {
                return Err(Error::Contract(format!(
                    "segment {i} ends ({}) before it starts ({})",
                    s.end, s.start
                )));
            }
        }
        for (i, w) in self.segments.windows(2).enumerate() {
            if w[1].start != w[0].end {
                let what = if w[1].start < w[0].end { "overlap" } else { "gap" };
                return Err(Error::Contract(format!(
                    "{what} between segments {i} and {}: {} vs {}",
                    i + 1,
                    w[0].end,
                    w[1].start
                )));
            }
        }
        let last = self.segments.last().unwrap().end;
        if last != self.tau_f {
            return Err(Error::Contract(format!("segments end at {last}, tau_f = {}", self.tau_f)));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("protocol serializes")
    }

    pub fn from_json(text: &str) -> Result<Protocol> {
        Ok(serde_json::from_str(text)?)
    }

    /// `tau,u,segment` rows. Each segment is sampled on its closed
    /// interval, so a switching time appears twice, once with each limit.
    /// About `samples` rows in total.
    pub fn control_csv(&self, samples: usize) -> String {
        let mut out = String::from("tau,u,segment\n");
        let live = self.live_segments();
        let span = self.tau_f.max(f64::MIN_POSITIVE);
        for (i, seg) in live.iter().enumerate() {
            let share = ((samples as f64) * (seg.end - seg.start) / span).round() as usize;
            for tau in sample_times_between(seg.start, seg.end, share.max(2)) {
                out.push_str(&format!("{},{},{}\n", tau, seg.law.eval(tau), i));
            }
        }
        out
    }
}

/// `tau,b,bdot,bddot,u` rows at `samples` uniformly spaced instants.
pub fn trajectory_csv(traj: &ScalingTrajectory, u: &dyn Control, samples: usize) -> String {
    let mut out = String::from("tau,b,bdot,bddot,u\n");
    for tau in sample_times(traj.tau_f(), samples) {
        let k = traj.eval(tau);
        out.push_str(&format!("{},{},{},{},{}\n", tau, k.b, k.bdot, k.bddot, u.value(tau)));
    }
    out
}

fn sample_times(tau_f: f64, samples: usize) -> Vec<f64> {
    sample_times_between(0.0, tau_f, samples)
}

fn sample_times_between(a: f64, b: f64, samples: usize) -> Vec<f64> {
    let n = samples.max(2);
    (0..n)
        .map(|k| if k + 1 == n { b } else { a + (b - a) * k as f64 / (n - 1) as f64 })
        .collect()
}

impl Control for Protocol {
    fn tau_f(&self) -> f64 {
        self.tau_f
    }

    fn breakpoints(&self) -> Vec<f64> {
        let live = self.live_segments();
        live.iter().skip(1).map(|s| s.start).collect()
    }

    fn value_in(&self, piece: usize, tau: f64) -> f64 {
        let live = self.live_segments();
        live[piece.min(live.len() - 1)].law.eval(tau)
    }

    fn impulses(&self) -> Vec<Impulse> {
        self.impulses
            .iter()
            .map(|i| Impulse {
                tau: i.tau,
                strength: i.strength,
            })
            .collect()
    }
}

/// Builds the protocol of `family`. `tau_f` is ignored for bang-bang, whose
/// duration is fixed by (γ, δ); `delta` is ignored by the unbounded
/// families.
pub fn design(family: Family, tau_f: Option<f64>, gamma: f64, delta: f64) -> Result<(Protocol, ScalingTrajectory)> {
    let need_tau = || {
        tau_f.ok_or_else(|| Error::Config(format!("family {family} needs a duration tau_f")))
    };
    match family {
        Family::BangBang => bangbang_protocol(gamma, delta),
        Family::BangSingularBang => bsb_protocol(need_tau()?, gamma, delta),
        Family::Unconstrained => unconstrained_protocol(need_tau()?, gamma),
        Family::Polynomial => polynomial_protocol(need_tau()?, gamma),
    }
}

/// Upper bound on the Skorokhod J1 distance between two controls.
///
/// Large jumps (|Δu| > `jump`) are paired in order and aligned by a
/// piecewise-linear time change λ; the result is max(‖λ − id‖∞,
/// sup|u_a∘λ − u_b|) sampled on `samples` points. Returns `None` when the
/// controls do not have the same number of large jumps.
pub fn skorokhod_distance(a: &Protocol, b: &Protocol, jump: f64, samples: usize) -> Option<f64> {
    let ja = large_jumps(a, jump);
    let jb = large_jumps(b, jump);
    if ja.len() != jb.len() {
        return None;
    }
    let mut knots_b = vec![0.0];
    knots_b.extend(&jb);
    knots_b.push(b.tau_f);
    let mut knots_a = vec![0.0];
    knots_a.extend(&ja);
    knots_a.push(a.tau_f);
    let lambda = |t: f64| -> f64 {
        let k = knots_b.partition_point(|&x| x <= t).clamp(1, knots_b.len() - 1) - 1;
        let (b0, b1) = (knots_b[k], knots_b[k + 1]);
        let (a0, a1) = (knots_a[k], knots_a[k + 1]);
        if b1 > b0 {
            a0 + (a1 - a0) * (t - b0) / (b1 - b0)
        } else {
            a0
        }
    };
    let mut warp: f64 = 0.0;
    let mut gap: f64 = 0.0;
    for t in sample_times(b.tau_f, samples) {
        let s = lambda(t);
        warp = warp.max((s - t).abs());
        gap = gap.max((a.value(s) - b.value(t)).abs());
    }
    for (x, y) in ja.iter().zip(&jb) {
        warp = warp.max((x - y).abs());
    }
    Some(warp.max(gap))
}

/// sup |u_a − u_b| over uniform samples of the common interval.
pub fn sup_distance(a: &Protocol, b: &Protocol, samples: usize) -> f64 {
    sample_times(a.tau_f.min(b.tau_f), samples)
        .into_iter()
        .map(|t| (a.value(t) - b.value(t)).abs())
        .fold(0.0, f64::max)
}

/// ∫|u_a − u_b| dτ over the common interval by the midpoint rule, plus the
/// length of the part covered by only one of them times the larger |u|.
pub fn l1_distance(a: &Protocol, b: &Protocol, samples: usize) -> f64 {
    let common = a.tau_f.min(b.tau_f);
    let n = samples.max(1);
    let h = common / n as f64;
    let body: f64 = (0..n)
        .map(|k| {
            let t = h * (k as f64 + 0.5);
            (a.value(t) - b.value(t)).abs() * h
        })
        .sum();
    let tail = (a.tau_f - b.tau_f).abs() * a.max_abs_control().max(b.max_abs_control());
    body + tail
}

fn large_jumps(p: &Protocol, threshold: f64) -> Vec<f64> {
    let live = p.live_segments();
    live.windows(2)
        .filter(|w| (w[1].law.eval(w[1].start) - w[0].law.eval(w[0].end)).abs() > threshold)
        .map(|w| w[1].start)
        .collect()
}
