//! Exact Phase-I simplex feasibility over rationals.
//!
//! Decides whether `A x = b, x >= 0` has a solution. Pivoting uses Bland's
//! rule (smallest eligible index enters; ties in the ratio test break to the
//! smallest basic index), which guarantees termination without any
//! tolerance knobs. On infeasibility the final reduced costs of the
//! artificial columns yield a Farkas certificate: a row functional `y` with
//! `y . a_j >= 0` for every column and `y . b < 0`.

use crate::numeric::Rational;

/// One equality constraint: sparse coefficients and a right-hand side.
#[derive(Debug, Clone)]
pub(crate) struct Row {
    pub coefficients: Vec<(usize, Rational)>,
    pub rhs: Rational,
}

/// The system `A x = b`, `x >= 0` with `columns` variables.
#[derive(Debug, Clone)]
pub(crate) struct FeasibilitySystem {
    pub columns: usize,
    pub rows: Vec<Row>,
}

#[derive(Debug, Clone)]
pub(crate) enum PhaseOneOutcome {
    /// A non-negative solution, one value per column.
    Feasible(Vec<Rational>),
    /// A separating functional, one value per row: pairing it with any
    /// column of `A` is non-negative, pairing it with `b` is negative.
    Infeasible(Vec<Rational>),
}

pub(crate) fn phase_one(system: &FeasibilitySystem) -> PhaseOneOutcome {
    let n = system.columns;
    let m = system.rows.len();
    if m == 0 {
        return PhaseOneOutcome::Feasible(vec![Rational::zero(); n]);
    }
    let width = n + m + 1; // structural + artificial + rhs
    let rhs_col = n + m;

    // rows are negated where needed so every rhs is non-negative; the
    // certificate is mapped back through the recorded signs
    let mut flipped = vec![false; m];
    let mut tableau: Vec<Vec<Rational>> = Vec::with_capacity(m + 1);
    for (i, row) in system.rows.iter().enumerate() {
        let mut t = vec![Rational::zero(); width];
        let flip = row.rhs.is_negative();
        flipped[i] = flip;
        for (col, coef) in &row.coefficients {
            debug_assert!(*col < n, "coefficient column out of range");
            let value = if flip { -coef } else { coef.clone() };
            t[*col] += value;
        }
        t[rhs_col] = if flip { -&row.rhs } else { row.rhs.clone() };
        t[n + i] = Rational::one();
        tableau.push(t);
    }

    // cost row for min(sum of artificials), canonicalized for the initial
    // artificial basis: reduced costs are -(column sums), objective cell
    // holds -(current objective)
    let mut cost = vec![Rational::zero(); width];
    for j in 0..width {
        if j >= n && j < rhs_col {
            continue;
        }
        let mut sum = Rational::zero();
        for row in tableau.iter() {
            sum += &row[j];
        }
        cost[j] = -sum;
    }

    let mut basis: Vec<usize> = (n..n + m).collect();

    // Bland: smallest index with a negative reduced cost enters
    while let Some(entering) = (0..rhs_col).find(|&j| cost[j].is_negative()) {
        // minimum ratio test, ties to the smallest basic index
        let mut leaving: Option<(usize, Rational)> = None;
        for (i, row) in tableau.iter().enumerate() {
            if !row[entering].is_positive() {
                continue;
            }
            let ratio = &row[rhs_col] / &row[entering];
            let better = match &leaving {
                None => true,
                Some((best_i, best_ratio)) => {
                    ratio < *best_ratio || (ratio == *best_ratio && basis[i] < basis[*best_i])
                }
            };
            if better {
                leaving = Some((i, ratio));
            }
        }
        let (pivot_row, _) = leaving
            .expect("phase-one objective is bounded below by zero, so no column is unbounded");

        pivot(&mut tableau, &mut cost, pivot_row, entering, rhs_col);
        basis[pivot_row] = entering;
    }

    let objective = -cost[rhs_col].clone();
    debug_assert!(!objective.is_negative());
    if objective.is_zero() {
        let mut solution = vec![Rational::zero(); n];
        for (i, &b) in basis.iter().enumerate() {
            if b < n {
                solution[b] = tableau[i][rhs_col].clone();
            }
        }
        PhaseOneOutcome::Feasible(solution)
    } else {
        // simplex multipliers from the artificial reduced costs:
        // y_i = 1 - cost[n+i]; the separating functional is -y, unflipped
        let certificate: Vec<Rational> = (0..m)
            .map(|i| {
                let y = Rational::one() - &cost[n + i];
                let neg = -y;
                if flipped[i] {
                    -neg
                } else {
                    neg
                }
            })
            .collect();
        debug_assert!(verify_certificate(system, &certificate));
        PhaseOneOutcome::Infeasible(certificate)
    }
}

/// Checks the Farkas conditions exactly: `cert . a_j >= 0` for every column
/// `j` and `cert . b < 0`.
pub(crate) fn verify_certificate(system: &FeasibilitySystem, certificate: &[Rational]) -> bool {
    if certificate.len() != system.rows.len() {
        return false;
    }
    let mut column_pairings = vec![Rational::zero(); system.columns];
    let mut rhs_pairing = Rational::zero();
    for (row, cert) in system.rows.iter().zip(certificate) {
        for (col, coef) in &row.coefficients {
            column_pairings[*col] += cert * coef;
        }
        rhs_pairing += cert * &row.rhs;
    }
    rhs_pairing.is_negative() && column_pairings.iter().all(|p| !p.is_negative())
}

fn pivot(
    tableau: &mut [Vec<Rational>],
    cost: &mut [Rational],
    pivot_row: usize,
    entering: usize,
    rhs_col: usize,
) {
    let pivot_value = tableau[pivot_row][entering].clone();
    for value in tableau[pivot_row].iter_mut() {
        *value /= &pivot_value;
    }
    let pivot_values = tableau[pivot_row].clone();
    for (i, row) in tableau.iter_mut().enumerate() {
        if i == pivot_row {
            continue;
        }
        let factor = row[entering].clone();
        if factor.is_zero() {
            continue;
        }
        for (value, pivot_value) in row.iter_mut().zip(&pivot_values) {
            let delta = &factor * pivot_value;
            *value -= delta;
        }
    }
    let factor = cost[entering].clone();
    if !factor.is_zero() {
        for (value, pivot_value) in cost.iter_mut().take(rhs_col + 1).zip(&pivot_values) {
            let delta = &factor * pivot_value;
            *value -= delta;
        }
    }
}

/// Solves `A x = b` with `x` unconstrained, by Gauss-Jordan elimination with
/// first-nonzero pivoting; free variables are set to zero. Returns `None`
/// when the system is inconsistent.
pub(crate) fn solve_exact(system: &FeasibilitySystem) -> Option<Vec<Rational>> {
    let n = system.columns;
    let m = system.rows.len();
    let mut matrix: Vec<Vec<Rational>> = system
        .rows
        .iter()
        .map(|row| {
            let mut dense = vec![Rational::zero(); n + 1];
            for (col, coef) in &row.coefficients {
                dense[*col] += coef;
            }
            dense[n] = row.rhs.clone();
            dense
        })
        .collect();

    let mut pivot_cols = Vec::new();
    let mut rank = 0;
    for col in 0..n {
        let Some(pivot_row) = (rank..m).find(|&i| !matrix[i][col].is_zero()) else {
            continue;
        };
        matrix.swap(rank, pivot_row);
        let pivot_value = matrix[rank][col].clone();
        for value in matrix[rank][col..=n].iter_mut() {
            *value /= &pivot_value;
        }
        let pivot_values = matrix[rank].clone();
        for (i, row) in matrix.iter_mut().enumerate() {
            if i == rank {
                continue;
            }
            let factor = row[col].clone();
            if factor.is_zero() {
                continue;
            }
            for (value, pivot_value) in row[col..=n].iter_mut().zip(&pivot_values[col..=n]) {
                let delta = &factor * pivot_value;
                *value -= delta;
            }
        }
        pivot_cols.push(col);
        rank += 1;
        if rank == m {
            break;
        }
    }

    // any leftover row with a nonzero rhs is a contradiction
    for row in matrix.iter().skip(rank) {
        if !row[n].is_zero() {
            return None;
        }
    }

    let mut solution = vec![Rational::zero(); n];
    for (i, &col) in pivot_cols.iter().enumerate() {
        solution[col] = matrix[i][n].clone();
    }
    Some(solution)
}
