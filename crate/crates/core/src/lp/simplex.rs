//! Dense-tableau bounded-variable primal simplex.
//!
//! Problem form: maximize `c·x` subject to `A x ≤ b`, `l ≤ x ≤ u`. Every row
//! gets a slack `s_i ≥ 0`, so the tableau `B⁻¹[A | I]` always carries the
//! basis inverse in its slack block. Infeasible starts (including after a row
//! is appended or a right-hand side moves) are handled by a composite phase 1
//! that minimizes the total bound violation of the basic variables, stepping
//! only to the first breakpoint so feasible basics stay feasible.
//!
//! The engine is warm-startable: rows can be appended and the objective or
//! right-hand sides replaced without discarding the current basis.

use crate::lp::{LinearProgram, LpSolution, LpStatus};
use crate::scalar::Scalar;

const NOT_BASIC: usize = usize::MAX;
const REINVERT_EVERY: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PivotRule {
    /// Largest reduced cost, switching to Bland after too many degenerate pivots.
    Dantzig,
    /// Smallest eligible index throughout.
    Bland,
}

#[derive(Debug, Clone, Default)]
pub struct SimplexStats {
    pub pivots: usize,
    pub bound_flips: usize,
    pub degenerate_pivots: usize,
    pub reinversions: usize,
    pub switched_to_bland: bool,
}

#[derive(Debug, Clone)]
pub struct Simplex<T> {
    n: usize,
    m: usize,
    rows: Vec<Vec<(usize, T)>>,
    rhs: Vec<T>,
    obj: Vec<T>,
    lower: Vec<T>,
    upper: Vec<Option<T>>,
    tab: Vec<T>,
    x: Vec<T>,
    basis: Vec<usize>,
    slot: Vec<usize>,
    d: Vec<T>,
    rule: PivotRule,
    since_reinvert: usize,
    stats: SimplexStats,
}

#[derive(Debug, Clone, Copy)]
enum Step {
    Unbounded,
    Flip,
    Pivot { row: usize, to_upper: bool },
}

impl<T: Scalar> Simplex<T> {
    pub fn new(lp: &LinearProgram<T>) -> Self {
        let n = lp.num_vars;
        let mut lower = lp.lower_bound.clone();
        let mut upper: Vec<Option<T>> = lp.upper_bound.iter().cloned().map(Some).collect();
        let mut x = lower.clone();
        let mut d = lp.objective.clone();
        let mut slot = vec![NOT_BASIC; n];
        for _ in 0..lp.rows.len() {
            lower.push(T::zero());
            upper.push(None);
            x.push(T::zero());
            d.push(T::zero());
            slot.push(NOT_BASIC);
        }
        let mut s = Self {
            n,
            m: 0,
            rows: Vec::new(),
            rhs: Vec::new(),
            obj: lp.objective.clone(),
            lower,
            upper,
            tab: Vec::new(),
            x,
            basis: Vec::new(),
            slot,
            d,
            rule: PivotRule::Dantzig,
            since_reinvert: 0,
            stats: SimplexStats::default(),
        };
        // slack basis: B = I, tableau = [A | I]
        let m = lp.rows.len();
        let width = n + m;
        s.tab = vec![T::zero(); m * width];
        for (i, (coefs, b)) in lp.rows.iter().enumerate() {
            let mut activity = T::zero();
            for (j, a) in coefs {
                s.tab[i * width + j] = s.tab[i * width + j].clone() + a.clone();
                activity = activity + a.clone() * s.x[*j].clone();
            }
            s.tab[i * width + n + i] = T::one();
            s.x[n + i] = b.clone() - activity;
            s.basis.push(n + i);
            s.slot[n + i] = i;
        }
        s.rows = lp.rows.iter().map(|(coefs, _)| coefs.clone()).collect();
        s.rhs = lp.rows.iter().map(|(_, b)| b.clone()).collect();
        s.m = m;
        s
    }

    pub fn num_vars(&self) -> usize {
        self.n
    }

    pub fn num_rows(&self) -> usize {
        self.m
    }

    pub fn stats(&self) -> &SimplexStats {
        &self.stats
    }

    pub fn set_pivot_rule(&mut self, rule: PivotRule) {
        self.rule = rule;
    }

    fn width(&self) -> usize {
        self.n + self.m
    }

    fn ftol() -> T {
        T::tolerance(1e-9)
    }

    fn otol() -> T {
        T::tolerance(1e-9)
    }

    fn drop_tol() -> T {
        T::tolerance(1e-13)
    }

    /// Replaces the objective and recomputes reduced costs for the current basis.
    pub fn set_objective(&mut self, objective: &[T]) {
        assert_eq!(objective.len(), self.n, "objective length");
        self.obj = objective.to_vec();
        self.recompute_reduced_costs();
    }

    pub fn objective_coefficients(&self) -> &[T] {
        &self.obj
    }

    /// Moves the right-hand side of row `i`; the basis is kept and the basic
    /// values recomputed (they may become infeasible, handled by phase 1).
    pub fn set_rhs(&mut self, row: usize, value: T) {
        self.rhs[row] = value;
        self.recompute_primal();
    }

    pub fn set_rhs_many(&mut self, updates: impl IntoIterator<Item = (usize, T)>) {
        for (row, value) in updates {
            self.rhs[row] = value;
        }
        self.recompute_primal();
    }

    /// Appends `Σ a_j x_j ≤ b` with its slack basic in the new row.
    pub fn add_row(&mut self, coefs: Vec<(usize, T)>, rhs: T) {
        let old_w = self.width();
        let new_w = old_w + 1;
        let m = self.m;

        let mut tab = Vec::with_capacity((m + 1) * new_w);
        for i in 0..m {
            tab.extend_from_slice(&self.tab[i * old_w..(i + 1) * old_w]);
            tab.push(T::zero());
        }
        let mut new_row = vec![T::zero(); new_w];
        let mut activity = T::zero();
        for (j, a) in &coefs {
            assert!(*j < self.n, "row coefficient index {j} out of range");
            new_row[*j] = new_row[*j].clone() + a.clone();
            activity = activity + a.clone() * self.x[*j].clone();
        }
        new_row[old_w] = T::one();
        for (j, a) in &coefs {
            let k = self.slot[*j];
            if k != NOT_BASIC && !a.is_zero() {
                let row = &tab[k * new_w..(k + 1) * new_w];
                for c in 0..new_w {
                    if !row[c].is_zero() {
                        new_row[c] = new_row[c].clone() - a.clone() * row[c].clone();
                    }
                }
            }
        }
        for (j, _) in &coefs {
            if self.slot[*j] != NOT_BASIC {
                new_row[*j] = T::zero();
            }
        }
        tab.extend(new_row);
        self.tab = tab;

        self.lower.push(T::zero());
        self.upper.push(None);
        self.x.push(rhs.clone() - activity);
        self.d.push(T::zero());
        self.slot.push(m);
        self.basis.push(old_w);
        self.rows.push(coefs);
        self.rhs.push(rhs);
        self.m += 1;
    }

    fn recompute_reduced_costs(&mut self) {
        let w = self.width();
        let mut d: Vec<T> = (0..w)
            .map(|j| if j < self.n { self.obj[j].clone() } else { T::zero() })
            .collect();
        for k in 0..self.m {
            let b = self.basis[k];
            if b >= self.n || self.obj[b].is_zero() {
                continue;
            }
            let cb = self.obj[b].clone();
            let row = &self.tab[k * w..(k + 1) * w];
            for c in 0..w {
                if !row[c].is_zero() {
                    d[c] = d[c].clone() - cb.clone() * row[c].clone();
                }
            }
        }
        for &b in &self.basis {
            d[b] = T::zero();
        }
        self.d = d;
    }

    /// Row residuals `b - N x_N` over the original rows.
    fn nonbasic_residual(&self) -> Vec<T> {
        let mut r = self.rhs.clone();
        for (i, coefs) in self.rows.iter().enumerate() {
            for (j, a) in coefs {
                if self.slot[*j] == NOT_BASIC && !self.x[*j].is_zero() {
                    r[i] = r[i].clone() - a.clone() * self.x[*j].clone();
                }
            }
            let s = self.n + i;
            if self.slot[s] == NOT_BASIC {
                r[i] = r[i].clone() - self.x[s].clone();
            }
        }
        r
    }

    fn recompute_primal(&mut self) {
        let w = self.width();
        let r = self.nonbasic_residual();
        for k in 0..self.m {
            let row = &self.tab[k * w + self.n..(k + 1) * w];
            let mut v = T::zero();
            for (i, bi) in row.iter().enumerate() {
                if !bi.is_zero() && !r[i].is_zero() {
                    v = v + bi.clone() * r[i].clone();
                }
            }
            self.x[self.basis[k]] = v;
        }
    }

    /// Rebuilds the tableau from the original data for the current basis.
    /// Returns false (leaving state untouched) if the basis is numerically singular.
    fn reinvert(&mut self) -> bool {
        let m = self.m;
        let w = self.width();
        if m == 0 {
            return true;
        }
        let mut bmat = vec![T::zero(); m * m];
        for (i, coefs) in self.rows.iter().enumerate() {
            for (j, a) in coefs {
                let k = self.slot[*j];
                if k != NOT_BASIC {
                    bmat[i * m + k] = bmat[i * m + k].clone() + a.clone();
                }
            }
            let k = self.slot[self.n + i];
            if k != NOT_BASIC {
                bmat[i * m + k] = T::one();
            }
        }
        // Gauss-Jordan on [B | I] with partial pivoting; rows of B index
        // constraints, columns index basis slots, so B⁻¹ maps rows to slots.
        let mut inv = vec![T::zero(); m * m];
        for i in 0..m {
            inv[i * m + i] = T::one();
        }
        for col in 0..m {
            let mut best = col;
            let mut best_abs = bmat[col * m + col].abs();
            for r in col + 1..m {
                let a = bmat[r * m + col].abs();
                if a > best_abs {
                    best = r;
                    best_abs = a;
                }
            }
            if best_abs <= T::tolerance(1e-12) {
                return false;
            }
            if best != col {
                for c in 0..m {
                    bmat.swap(col * m + c, best * m + c);
                    inv.swap(col * m + c, best * m + c);
                }
            }
            let p = bmat[col * m + col].clone();
            for c in 0..m {
                bmat[col * m + c] = bmat[col * m + c].clone() / p.clone();
                inv[col * m + c] = inv[col * m + c].clone() / p.clone();
            }
            for r in 0..m {
                if r == col {
                    continue;
                }
                let f = bmat[r * m + col].clone();
                if f.is_zero() {
                    continue;
                }
                for c in 0..m {
                    if !bmat[col * m + c].is_zero() {
                        bmat[r * m + c] = bmat[r * m + c].clone() - f.clone() * bmat[col * m + c].clone();
                    }
                    if !inv[col * m + c].is_zero() {
                        inv[r * m + c] = inv[r * m + c].clone() - f.clone() * inv[col * m + c].clone();
                    }
                }
            }
        }
        // row `k` of inv is basis slot k
        let mut tab = vec![T::zero(); m * w];
        for k in 0..m {
            for i in 0..m {
                let v = inv[k * m + i].clone();
                if v.is_zero() {
                    continue;
                }
                for (j, a) in &self.rows[i] {
                    tab[k * w + j] = tab[k * w + j].clone() + v.clone() * a.clone();
                }
                tab[k * w + self.n + i] = v;
            }
        }
        for (k, &b) in self.basis.iter().enumerate() {
            for kk in 0..m {
                tab[kk * w + b] = if kk == k { T::one() } else { T::zero() };
            }
        }
        self.tab = tab;
        self.recompute_primal();
        self.recompute_reduced_costs();
        self.since_reinvert = 0;
        self.stats.reinversions += 1;
        true
    }

    fn at_upper(&self, j: usize) -> bool {
        matches!(&self.upper[j], Some(u) if self.x[j] >= *u)
    }

    fn is_fixed(&self, j: usize) -> bool {
        matches!(&self.upper[j], Some(u) if *u <= self.lower[j])
    }

    /// -1 below lower bound, +1 above upper bound, 0 within tolerance.
    fn violation(&self, j: usize) -> i8 {
        let ftol = Self::ftol();
        if self.x[j] < self.lower[j].clone() - ftol.clone() {
            -1
        } else if matches!(&self.upper[j], Some(u) if self.x[j] > u.clone() + ftol) {
            1
        } else {
            0
        }
    }

    fn choose_entering(&self, grad: &[T], bland: bool) -> Option<(usize, bool)> {
        let tol = Self::otol();
        let mut best: Option<(usize, bool, T)> = None;
        for j in 0..self.width() {
            if self.slot[j] != NOT_BASIC || self.is_fixed(j) {
                continue;
            }
            let g = &grad[j];
            let increase = if self.at_upper(j) {
                if *g < -tol.clone() {
                    false
                } else {
                    continue;
                }
            } else if *g > tol {
                true
            } else {
                continue;
            };
            if bland {
                return Some((j, increase));
            }
            let mag = g.abs();
            if best.as_ref().map_or(true, |(_, _, b)| mag > *b) {
                best = Some((j, increase, mag));
            }
        }
        best.map(|(j, inc, _)| (j, inc))
    }

    fn phase1_gradient(&self, infeasible: &[(usize, i8)]) -> Vec<T> {
        let w = self.width();
        let mut g = vec![T::zero(); w];
        for &(k, side) in infeasible {
            let row = &self.tab[k * w..(k + 1) * w];
            for c in 0..w {
                if row[c].is_zero() {
                    continue;
                }
                // x_B(k) moves by -T[k][c] per unit of x_c
                if side < 0 {
                    g[c] = g[c].clone() - row[c].clone();
                } else {
                    g[c] = g[c].clone() + row[c].clone();
                }
            }
        }
        g
    }

    fn ratio_test(&self, j: usize, increase: bool, phase1: bool, bland: bool) -> (Step, T) {
        let w = self.width();
        let ptol = T::pivot_tol();
        let ftol = Self::ftol();
        let mut best_step: Option<T> = None;
        let mut choice = Step::Unbounded;
        let mut best_piv = T::zero();

        if let Some(u) = &self.upper[j] {
            best_step = Some(u.clone() - self.lower[j].clone());
            choice = Step::Flip;
        }

        for k in 0..self.m {
            let t = &self.tab[k * w + j];
            if t.abs() <= ptol {
                continue;
            }
            // rate of change of x_B(k) per unit step of the entering variable
            let rate = if increase { -t.clone() } else { t.clone() };
            let b = self.basis[k];
            let xb = &self.x[b];
            let side = if phase1 { self.violation(b) } else { 0 };
            let candidate = match side {
                -1 => (rate > T::zero()).then(|| ((self.lower[b].clone() - xb.clone()) / rate.clone(), false)),
                1 => (rate < T::zero()).then(|| {
                    let u = self.upper[b].clone().expect("above upper implies finite upper");
                    ((xb.clone() - u) / -rate.clone(), true)
                }),
                _ => {
                    if rate < T::zero() {
                        Some((
                            T::max_of((xb.clone() - self.lower[b].clone()) / -rate.clone(), T::zero()),
                            false,
                        ))
                    } else {
                        self.upper[b].as_ref().map(|u| {
                            (T::max_of((u.clone() - xb.clone()) / rate.clone(), T::zero()), true)
                        })
                    }
                }
            };
            let Some((step, to_upper)) = candidate else { continue };
            let better = match &best_step {
                None => true,
                Some(bs) => {
                    if step < bs.clone() - ftol.clone() {
                        true
                    } else if step <= bs.clone() + ftol.clone() {
                        // tie: keep bound flips, then Bland index or largest pivot
                        match choice {
                            Step::Flip => false,
                            Step::Pivot { row, .. } => {
                                if bland {
                                    b < self.basis[row]
                                } else {
                                    t.abs() > best_piv
                                }
                            }
                            Step::Unbounded => true,
                        }
                    } else {
                        false
                    }
                }
            };
            if better {
                best_piv = t.abs();
                best_step = Some(step);
                choice = Step::Pivot { row: k, to_upper };
            }
        }
        (choice, best_step.unwrap_or_else(T::zero))
    }

    fn pivot(&mut self, r: usize, j: usize) {
        let w = self.width();
        let p = self.tab[r * w + j].clone();
        let drop = Self::drop_tol();
        let mut nz = Vec::new();
        for c in 0..w {
            let v = self.tab[r * w + c].clone();
            if !v.is_zero() {
                let v = v / p.clone();
                if v.abs() <= drop {
                    self.tab[r * w + c] = T::zero();
                } else {
                    self.tab[r * w + c] = v.clone();
                    nz.push((c, v));
                }
            }
        }
        self.tab[r * w + j] = T::one();
        for i in 0..self.m {
            if i == r {
                continue;
            }
            let f = self.tab[i * w + j].clone();
            if f.is_zero() {
                continue;
            }
            for (c, v) in &nz {
                let idx = i * w + c;
                let nv = self.tab[idx].clone() - f.clone() * v.clone();
                self.tab[idx] = if nv.abs() <= drop { T::zero() } else { nv };
            }
            self.tab[i * w + j] = T::zero();
        }
        let dj = self.d[j].clone();
        if !dj.is_zero() {
            for (c, v) in &nz {
                self.d[*c] = self.d[*c].clone() - dj.clone() * v.clone();
            }
        }
        self.d[j] = T::zero();

        let leaving = self.basis[r];
        self.slot[leaving] = NOT_BASIC;
        self.basis[r] = j;
        self.slot[j] = r;
        self.stats.pivots += 1;
        self.since_reinvert += 1;
    }

    /// Runs phase 1 (if needed) and phase 2 from the current basis.
    pub fn solve(&mut self, iter_limit: usize) -> LpStatus {
        let degenerate_limit = 3 * (self.n + self.m);
        let mut degenerate = 0usize;
        let mut bland = self.rule == PivotRule::Bland;
        let ftol = Self::ftol();

        for _ in 0..iter_limit {
            if !T::EXACT && self.since_reinvert >= REINVERT_EVERY {
                self.reinvert();
            }
            let infeasible: Vec<(usize, i8)> = (0..self.m)
                .filter_map(|k| {
                    let side = self.violation(self.basis[k]);
                    (side != 0).then_some((k, side))
                })
                .collect();
            let phase1 = !infeasible.is_empty();
            let entering = if phase1 {
                let g = self.phase1_gradient(&infeasible);
                self.choose_entering(&g, bland)
            } else {
                self.choose_entering(&self.d, bland)
            };
            let Some((j, increase)) = entering else {
                if phase1 {
                    // a fresh factorization may clear accumulated drift
                    if !T::EXACT && self.since_reinvert > 0 && self.reinvert() {
                        continue;
                    }
                    return LpStatus::Infeasible;
                }
                return LpStatus::Optimal;
            };

            let (step, len) = self.ratio_test(j, increase, phase1, bland);
            if matches!(step, Step::Unbounded) {
                return LpStatus::Unbounded;
            }
            if len <= ftol {
                degenerate += 1;
                self.stats.degenerate_pivots += 1;
                if !bland && degenerate > degenerate_limit {
                    bland = true;
                    self.stats.switched_to_bland = true;
                }
            }

            let w = self.width();
            let delta = if increase { len.clone() } else { -len.clone() };
            if !delta.is_zero() {
                self.x[j] = self.x[j].clone() + delta.clone();
                for k in 0..self.m {
                    let t = &self.tab[k * w + j];
                    if !t.is_zero() {
                        let b = self.basis[k];
                        self.x[b] = self.x[b].clone() - t.clone() * delta.clone();
                    }
                }
            }
            match step {
                Step::Flip => {
                    self.x[j] = if increase {
                        self.upper[j].clone().expect("flip needs finite upper")
                    } else {
                        self.lower[j].clone()
                    };
                    self.stats.bound_flips += 1;
                }
                Step::Pivot { row, to_upper } => {
                    let leaving = self.basis[row];
                    self.pivot(row, j);
                    self.x[leaving] = if to_upper {
                        self.upper[leaving].clone().expect("finite upper")
                    } else {
                        self.lower[leaving].clone()
                    };
                }
                Step::Unbounded => unreachable!(),
            }
        }
        LpStatus::IterationLimit
    }

    /// Current structural values, clamped onto their boxes.
    pub fn values(&self) -> Vec<T> {
        (0..self.n)
            .map(|j| {
                let mut v = T::max_of(self.x[j].clone(), self.lower[j].clone());
                if let Some(u) = &self.upper[j] {
                    v = T::min_of(v, u.clone());
                }
                v
            })
            .collect()
    }

    pub fn objective_value(&self) -> T {
        self.values()
            .iter()
            .zip(&self.obj)
            .fold(T::zero(), |acc, (x, c)| acc + x.clone() * c.clone())
    }

    /// Basic variables (structural or slack) with value within 1e-9 of zero.
    pub fn zero_basic_count(&self) -> usize {
        let tol = T::tolerance(1e-9);
        self.basis.iter().filter(|&&b| self.x[b].abs() <= tol).count()
    }

    /// Nonbasic, non-fixed variables whose reduced cost is within the
    /// optimality tolerance of zero (alternative optima directions).
    pub fn zero_reduced_cost_count(&self) -> usize {
        let tol = Self::otol();
        (0..self.width())
            .filter(|&j| self.slot[j] == NOT_BASIC && !self.is_fixed(j) && self.d[j].abs() <= tol)
            .count()
    }

    pub fn solution(&self, status: LpStatus) -> LpSolution<T> {
        LpSolution {
            status,
            values: self.values(),
            objective: self.objective_value(),
            zero_basic_count: self.zero_basic_count(),
            zero_reduced_cost_count: self.zero_reduced_cost_count(),
        }
    }
}
