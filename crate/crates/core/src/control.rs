//! Piecewise controls u(τ) = ω²(τ)/ω₀².

/// An impulsive kick ∫u dτ concentrated at a single instant.
///
/// Protocols whose scaling trajectory starts or ends with ḃ ≠ 0 need one to
/// connect to the static traps outside [0, τ_f].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Impulse {
    pub tau: f64,
    pub strength: f64,
}

/// A control on [0, τ_f] that is smooth on each piece between breakpoints.
///
/// Piece `i` covers `[edges[i], edges[i + 1]]`, where the edges are
/// `0, breakpoints..., τ_f`. `value_in` evaluates the closed-piece limit so
/// integrators never see the neighbouring value at a switching time.
pub trait Control: Sync {
    fn tau_f(&self) -> f64;

    /// Interior switching times, sorted, strictly inside (0, τ_f).
    fn breakpoints(&self) -> Vec<f64>;

    fn value_in(&self, piece: usize, tau: f64) -> f64;

    fn impulses(&self) -> Vec<Impulse> {
        Vec::new()
    }

    fn edges(&self) -> Vec<f64> {
        let mut e = vec![0.0];
        e.extend(self.breakpoints());
        e.push(self.tau_f());
        e
    }

    fn piece_at(&self, tau: f64) -> usize {
        self.breakpoints().iter().filter(|&&b| tau >= b).count()
    }

    /// Right-continuous evaluation.
    fn value(&self, tau: f64) -> f64 {
        self.value_in(self.piece_at(tau), tau)
    }
}

/// u ≡ const on [0, τ_f].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantControl {
    pub value: f64,
    pub tau_f: f64,
}

impl Control for ConstantControl {
    fn tau_f(&self) -> f64 {
        self.tau_f
    }
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }
    fn value_in(&self, _piece: usize, _tau: f64) -> f64 {
        self.value
    }
}

type PieceFn = Box<dyn Fn(f64) -> f64 + Send + Sync>;

/// A control assembled from closures, one per piece.
pub struct PiecewiseControl {
    edges: Vec<f64>,
    pieces: Vec<PieceFn>,
    impulses: Vec<Impulse>,
}

impl PiecewiseControl {
    /// `edges` must start at 0 and be non-decreasing; one closure per piece.
    pub fn new(edges: Vec<f64>, pieces: Vec<PieceFn>) -> Self {
        assert_eq!(edges.len(), pieces.len() + 1, "one closure per piece");
        assert!(edges.windows(2).all(|w| w[1] >= w[0]));
        PiecewiseControl {
            edges,
            pieces,
            impulses: Vec::new(),
        }
    }

    pub fn with_impulses(mut self, impulses: Vec<Impulse>) -> Self {
        self.impulses = impulses;
        self
    }
}

impl Control for PiecewiseControl {
    fn tau_f(&self) -> f64 {
        *self.edges.last().unwrap()
    }
    fn breakpoints(&self) -> Vec<f64> {
        self.edges[1..self.edges.len() - 1].to_vec()
    }
    fn value_in(&self, piece: usize, tau: f64) -> f64 {
        (self.pieces[piece.min(self.pieces.len() - 1)])(tau)
    }
    fn impulses(&self) -> Vec<Impulse> {
        self.impulses.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn piecewise_is_right_continuous_and_pieces_see_their_own_limit() {
        let c = PiecewiseControl::new(
            vec![0.0, 1.0, 2.0],
            vec![Box::new(|_| -1.0), Box::new(|_| 1.0)],
        );
        assert_eq!(c.value(0.5), -1.0);
        assert_eq!(c.value(1.0), 1.0);
        assert_eq!(c.value_in(0, 1.0), -1.0);
        assert_eq!(c.value(2.0), 1.0);
        assert_eq!(c.edges(), vec![0.0, 1.0, 2.0]);
    }
}
