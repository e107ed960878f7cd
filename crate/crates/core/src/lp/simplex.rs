//! Dense two-phase primal simplex.
//!
//! Rows are flipped so every right-hand side is nonnegative, then each row
//! receives one identity column (a slack for `≤`, an artificial for `≥` and
//! `=`). Those columns stay in the tableau for the whole run, so the current
//! basis inverse and the row duals can always be read off them. That is what
//! makes [`Tableau::add_column`] cheap for column generation.

use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-9;
const OPT_TOL: f64 = 1e-10;
const FEAS_TOL: f64 = 1e-8;
const DEGENERATE_STREAK: usize = 25;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinearProgram {
    pub sense: Sense,
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl LinearProgram {
    /// Variables default to `0 ≤ x ≤ ∞`.
    pub fn new(sense: Sense, objective: Vec<f64>) -> Self {
        let n = objective.len();
        Self { sense, objective, constraints: Vec::new(), lower: vec![0.0; n], upper: vec![f64::INFINITY; n] }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add_constraint(&mut self, coeffs: Vec<f64>, relation: Relation, rhs: f64) {
        self.constraints.push(Constraint { coeffs, relation, rhs });
    }

    pub fn set_bounds(&mut self, var: usize, lower: f64, upper: f64) {
        self.lower[var] = lower;
        self.upper[var] = upper;
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        if self.lower.len() != n || self.upper.len() != n {
            return Err(Error::InvalidInput("bound vectors do not match objective width".into()));
        }
        if self.objective.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidInput("objective has non-finite coefficients".into()));
        }
        for (i, row) in self.constraints.iter().enumerate() {
            if row.coeffs.len() != n {
                return Err(Error::InvalidInput(format!("row {i} has width {}, expected {n}", row.coeffs.len())));
            }
            if row.coeffs.iter().any(|c| !c.is_finite()) || !row.rhs.is_finite() {
                return Err(Error::InvalidInput(format!("row {i} has non-finite data")));
            }
        }
        for j in 0..n {
            if !self.lower[j].is_finite() {
                return Err(Error::InvalidInput(format!("variable {j} needs a finite lower bound")));
            }
            if self.upper[j] < self.lower[j] || self.upper[j].is_nan() {
                return Err(Error::InvalidInput(format!("variable {j} has lower > upper")));
            }
        }
        Ok(())
    }

    /// Objective value of `x` in the LP's own sense.
    pub fn evaluate(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Largest violation of any row or bound by `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for row in &self.constraints {
            let lhs: f64 = row.coeffs.iter().zip(x).map(|(a, v)| a * v).sum();
            let v = match row.relation {
                Relation::Le => lhs - row.rhs,
                Relation::Ge => row.rhs - lhs,
                Relation::Eq => (lhs - row.rhs).abs(),
            };
            worst = worst.max(v);
        }
        for (j, &v) in x.iter().enumerate() {
            worst = worst.max(self.lower[j] - v).max(v - self.upper[j]);
        }
        worst
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    /// Shadow price of each constraint: change of the optimal objective per
    /// unit increase of its right-hand side.
    pub duals: Vec<f64>,
    pub pivots: usize,
}

/// Solves `lp` to optimality.
pub fn simplex_solve(lp: &LinearProgram) -> Result<LpSolution> {
    let mut tab = Tableau::build(lp)?;
    tab.solve()?;
    Ok(tab.solution())
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum ColKind {
    Structural,
    Slack,
    Artificial,
}

/// Simplex state kept between solves.
pub(crate) struct Tableau {
    rows: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    /// Reduced costs of the real objective (internal minimisation).
    obj: Vec<f64>,
    obj_rhs: f64,
    kind: Vec<ColKind>,
    /// Internal column of each user variable.
    var_col: Vec<usize>,
    basis: Vec<usize>,
    init_col: Vec<usize>,
    row_sign: Vec<f64>,
    /// Number of user rows; bound rows follow them.
    user_rows: usize,
    sense_sign: f64,
    lower: Vec<f64>,
    pivots: usize,
    phase_one_done: bool,
}

impl Tableau {
    pub(crate) fn build(lp: &LinearProgram) -> Result<Self> {
        lp.validate()?;
        let nvars = lp.num_vars();
        let sense_sign = match lp.sense {
            Sense::Minimize => 1.0,
            Sense::Maximize => -1.0,
        };

        let mut raw: Vec<(Vec<f64>, Relation, f64)> = lp
            .constraints
            .iter()
            .map(|c| {
                let shift: f64 = c.coeffs.iter().zip(&lp.lower).map(|(a, l)| a * l).sum();
                (c.coeffs.clone(), c.relation, c.rhs - shift)
            })
            .collect();
        let user_rows = raw.len();
        for j in 0..nvars {
            if lp.upper[j].is_finite() {
                let mut coeffs = vec![0.0; nvars];
                coeffs[j] = 1.0;
                raw.push((coeffs, Relation::Le, lp.upper[j] - lp.lower[j]));
            }
        }

        let m = raw.len();
        let mut kind = vec![ColKind::Structural; nvars];
        let mut rows: Vec<Vec<f64>> = Vec::with_capacity(m);
        let mut rhs = Vec::with_capacity(m);
        let mut row_sign = Vec::with_capacity(m);
        let mut relations = Vec::with_capacity(m);
        for (coeffs, rel, b) in raw {
            let (sign, rel) = if b < 0.0 {
                let flipped = match rel {
                    Relation::Le => Relation::Ge,
                    Relation::Ge => Relation::Le,
                    Relation::Eq => Relation::Eq,
                };
                (-1.0, flipped)
            } else {
                (1.0, rel)
            };
            rows.push(coeffs.into_iter().map(|a| a * sign).collect());
            rhs.push(b * sign);
            row_sign.push(sign);
            relations.push(rel);
        }

        // Surplus columns for ≥ rows, then one identity column per row.
        for (i, rel) in relations.iter().enumerate() {
            if *rel == Relation::Ge {
                for (r, row) in rows.iter_mut().enumerate() {
                    row.push(if r == i { -1.0 } else { 0.0 });
                }
                kind.push(ColKind::Slack);
            }
        }
        let mut init_col = Vec::with_capacity(m);
        for (i, rel) in relations.iter().enumerate() {
            for (r, row) in rows.iter_mut().enumerate() {
                row.push(if r == i { 1.0 } else { 0.0 });
            }
            init_col.push(kind.len());
            kind.push(if *rel == Relation::Le { ColKind::Slack } else { ColKind::Artificial });
        }

        let ncols = kind.len();
        let mut obj = vec![0.0; ncols];
        for j in 0..nvars {
            obj[j] = sense_sign * lp.objective[j];
        }
        let const_term: f64 = lp.objective.iter().zip(&lp.lower).map(|(c, l)| c * l).sum();
        Ok(Self {
            rows,
            rhs,
            obj,
            obj_rhs: -sense_sign * const_term,
            kind,
            var_col: (0..nvars).collect(),
            basis: init_col.clone(),
            init_col,
            row_sign,
            user_rows,
            sense_sign,
            lower: lp.lower.clone(),
            pivots: 0,
            phase_one_done: false,
        })
    }

    fn ncols(&self) -> usize {
        self.kind.len()
    }

    fn max_pivots(&self) -> usize {
        20_000 + 50 * (self.rows.len() + self.ncols())
    }

    fn pivot(&mut self, r: usize, c: usize, phase1: &mut Option<(Vec<f64>, f64)>) {
        let p = self.rows[r][c];
        {
            let row = &mut self.rows[r];
            for v in row.iter_mut() {
                *v /= p;
            }
            row[c] = 1.0;
        }
        self.rhs[r] /= p;
        let prow = self.rows[r].clone();
        let prhs = self.rhs[r];
        for i in 0..self.rows.len() {
            if i == r {
                continue;
            }
            let f = self.rows[i][c];
            if f != 0.0 {
                let row = &mut self.rows[i];
                for (v, pv) in row.iter_mut().zip(&prow) {
                    *v -= f * pv;
                }
                row[c] = 0.0;
                self.rhs[i] -= f * prhs;
                if self.rhs[i].abs() < 1e-13 {
                    self.rhs[i] = 0.0;
                }
            }
        }
        let f = self.obj[c];
        if f != 0.0 {
            for (v, pv) in self.obj.iter_mut().zip(&prow) {
                *v -= f * pv;
            }
            self.obj[c] = 0.0;
            self.obj_rhs -= f * prhs;
        }
        if let Some((p1, p1_rhs)) = phase1.as_mut() {
            let f = p1[c];
            if f != 0.0 {
                for (v, pv) in p1.iter_mut().zip(&prow) {
                    *v -= f * pv;
                }
                p1[c] = 0.0;
                *p1_rhs -= f * prhs;
            }
        }
        self.basis[r] = c;
        self.pivots += 1;
    }

    /// Primal simplex on the given reduced-cost row.
    fn run(&mut self, phase1: &mut Option<(Vec<f64>, f64)>, allow_artificial: bool) -> Result<()> {
        let mut degenerate = 0usize;
        let mut in_basis = vec![false; self.ncols()];
        for &b in &self.basis {
            in_basis[b] = true;
        }
        loop {
            if self.pivots > self.max_pivots() {
                return Err(Error::Stalled { pivots: self.pivots });
            }
            let bland = degenerate >= DEGENERATE_STREAK;
            let costs: &[f64] = match phase1 {
                Some((p1, _)) => p1,
                None => &self.obj,
            };
            let mut enter = None;
            let mut best = -OPT_TOL;
            for j in 0..costs.len() {
                if in_basis[j] || (!allow_artificial && self.kind[j] == ColKind::Artificial) {
                    continue;
                }
                if bland {
                    if costs[j] < -OPT_TOL {
                        enter = Some(j);
                        break;
                    }
                } else if costs[j] < best {
                    best = costs[j];
                    enter = Some(j);
                }
            }
            let Some(c) = enter else { return Ok(()) };

            let mut leave: Option<usize> = None;
            let mut best_ratio = f64::INFINITY;
            for i in 0..self.rows.len() {
                let a = self.rows[i][c];
                if a > PIVOT_TOL {
                    let ratio = self.rhs[i].max(0.0) / a;
                    let better = match leave {
                        None => true,
                        Some(l) => {
                            if ratio < best_ratio - 1e-12 {
                                true
                            } else if ratio <= best_ratio + 1e-12 {
                                if bland {
                                    self.basis[i] < self.basis[l]
                                } else {
                                    a > self.rows[l][c]
                                }
                            } else {
                                false
                            }
                        }
                    };
                    if better {
                        best_ratio = ratio;
                        leave = Some(i);
                    }
                }
            }
            let Some(r) = leave else { return Err(Error::Unbounded) };
            if best_ratio <= 1e-12 {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
            in_basis[self.basis[r]] = false;
            in_basis[c] = true;
            self.pivot(r, c, phase1);
        }
    }

    pub(crate) fn solve(&mut self) -> Result<()> {
        if !self.phase_one_done {
            let art_rows: Vec<usize> =
                (0..self.rows.len()).filter(|&i| self.kind[self.basis[i]] == ColKind::Artificial).collect();
            if !art_rows.is_empty() {
                let mut p1 = vec![0.0; self.ncols()];
                let mut p1_rhs = 0.0;
                for &i in &art_rows {
                    for (j, v) in self.rows[i].iter().enumerate() {
                        if self.kind[j] != ColKind::Artificial {
                            p1[j] -= v;
                        }
                    }
                    p1_rhs -= self.rhs[i];
                }
                let mut phase1 = Some((p1, p1_rhs));
                self.run(&mut phase1, true)?;
                let infeasibility: f64 = (0..self.rows.len())
                    .filter(|&i| self.kind[self.basis[i]] == ColKind::Artificial)
                    .map(|i| self.rhs[i])
                    .sum();
                let scale = 1.0 + self.rhs.iter().fold(0.0f64, |a, b| a.max(b.abs()));
                if infeasibility > FEAS_TOL * scale {
                    return Err(Error::Infeasible);
                }
                // Drive zero-level artificials out where a real column can replace them.
                let mut none = None;
                for i in 0..self.rows.len() {
                    if self.kind[self.basis[i]] != ColKind::Artificial {
                        continue;
                    }
                    let pick = (0..self.ncols())
                        .filter(|&j| self.kind[j] != ColKind::Artificial && !self.basis.contains(&j))
                        .max_by(|&a, &b| self.rows[i][a].abs().total_cmp(&self.rows[i][b].abs()));
                    if let Some(j) = pick {
                        if self.rows[i][j].abs() > 1e-7 {
                            self.pivot(i, j, &mut none);
                        }
                    }
                }
            }
            self.phase_one_done = true;
        }
        self.run(&mut None, false)
    }

    /// Appends a structural column `≥ 0` with the given objective coefficient
    /// and coefficients on the user rows. Returns its variable index.
    pub(crate) fn add_column(&mut self, cost: f64, coeffs: &[f64]) -> usize {
        debug_assert_eq!(coeffs.len(), self.user_rows);
        let m = self.rows.len();
        let mut flipped = vec![0.0; m];
        for i in 0..self.user_rows {
            flipped[i] = coeffs[i] * self.row_sign[i];
        }
        let mut col = vec![0.0; m];
        for (r, out) in col.iter_mut().enumerate() {
            let row = &self.rows[r];
            *out = (0..m).map(|i| row[self.init_col[i]] * flipped[i]).sum();
        }
        let mut reduced = self.sense_sign * cost;
        for i in 0..m {
            reduced += self.obj[self.init_col[i]] * flipped[i];
        }
        for (row, v) in self.rows.iter_mut().zip(col) {
            row.push(v);
        }
        self.obj.push(reduced);
        self.kind.push(ColKind::Structural);
        self.lower.push(0.0);
        self.var_col.push(self.kind.len() - 1);
        self.var_col.len() - 1
    }

    pub(crate) fn solution(&self) -> LpSolution {
        let nvars = self.var_col.len();
        let mut value_of_col = vec![0.0; self.ncols()];
        for (i, &b) in self.basis.iter().enumerate() {
            value_of_col[b] = self.rhs[i].max(0.0);
        }
        let x: Vec<f64> = (0..nvars).map(|j| value_of_col[self.var_col[j]] + self.lower[j]).collect();
        let duals: Vec<f64> = (0..self.user_rows)
            .map(|i| -self.obj[self.init_col[i]] * self.row_sign[i] * self.sense_sign)
            .collect();
        LpSolution { x, objective: -self.obj_rhs * self.sense_sign, duals, pivots: self.pivots }
    }
}
