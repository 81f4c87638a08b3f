use rayon::prelude::*;

use crate::corrector::stencil::{pair_residual, Stencil};
use crate::corrector::{Action, Backend, CorrectorProblem, CorrectorSolution, PolicyField, SolverOptions, TransferPair};
use crate::error::{Error, Result};
use crate::grid::{Grid, MAX_DIM};
use crate::linalg::{solve_bordered, BandedMatrix, BiCgStab, CsrMatrix, LinearSolver};
use crate::scalar::Scalar;

/// The zeroth-order part of the diffusion row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DiffuseTerm<T> {
    /// `a - L w - f`, eigenvalue `a`.
    Ergodic(T),
    /// `eta w - L w - f`, discount `eta`.
    Discounted(T),
}

impl<T: Scalar> DiffuseTerm<T> {
    fn residual(&self, w_node: T, generator: T, cost: T) -> T {
        match *self {
            DiffuseTerm::Ergodic(a) => a - generator - cost,
            DiffuseTerm::Discounted(eta) => eta * w_node - generator - cost,
        }
    }
}

/// Boundary transfers that strictly reduce the L1 distance to the center,
/// which keeps forced chains acyclic.
fn inward_pairs<T: Scalar>(grid: &Grid<T>, pairs: &[TransferPair<T>], node: usize) -> Vec<(usize, usize)> {
    let l1 = grid.l1_steps(node);
    pairs
        .iter()
        .enumerate()
        .filter_map(|(p, pair)| grid.shift(node, &pair.step).filter(|&t| grid.l1_steps(t) < l1).map(|t| (p, t)))
        .collect()
}

fn neumann_target<T: Scalar>(grid: &Grid<T>, node: usize) -> usize {
    let mut m = grid.multi_index(node);
    let last = grid.n() as i64 - 1;
    for slot in m.iter_mut().take(grid.d()) {
        if *slot == 0 {
            *slot = 1;
        } else if *slot == last {
            *slot = last - 1;
        }
    }
    debug_assert!(m.len() == MAX_DIM);
    grid.index(&m).expect("inward neighbor")
}

/// Lexicographically first pair with the largest residual.
fn argmax<T>(residuals: &[(usize, T)]) -> Option<(usize, T)>
where
    T: Scalar,
{
    let mut best: Option<(usize, T)> = None;
    for &(p, r) in residuals {
        if best.is_none_or(|(_, b)| r > b) {
            best = Some((p, r));
        }
    }
    best
}

/// Starting policy: diffuse in the interior, cheapest inward transfer on the boundary.
pub fn initial_policy<T: Scalar>(problem: &CorrectorProblem<T>) -> PolicyField {
    let grid = &problem.grid;
    let pairs = problem.pairs();
    let actions = (0..grid.len())
        .map(|node| {
            if !grid.is_boundary(node) {
                return Action::Diffuse;
            }
            let cands: Vec<(usize, T)> = inward_pairs(grid, &pairs, node).into_iter().map(|(p, _)| (p, -pairs[p].lambda)).collect();
            match argmax(&cands) {
                Some((p, _)) => Action::Transfer(p),
                None => Action::Neumann(neumann_target(grid, node)),
            }
        })
        .collect();
    PolicyField { actions }
}

/// Greedy policy update.
///
/// Without a previous policy a node transfers along the largest residual
/// `r = (w(rho) - w(rho + h d)) / h - lambda` when that constraint binds,
/// i.e. `r >= -tol_switch`, and diffuses otherwise. With a previous policy and its diffusion term the
/// update is Howard's argmax over the residuals of every row, keeping the
/// current action unless another one is better by more than `tol_switch`.
/// Boundary nodes always transfer inward (zero-flux link when no inward
/// transfer exists).
pub fn improve_policy<T: Scalar>(
    w: &[T],
    problem: &CorrectorProblem<T>,
    previous: Option<(&PolicyField, DiffuseTerm<T>)>,
    tol_switch: T,
) -> PolicyField {
    let grid = &problem.grid;
    let pairs = problem.pairs();
    let stencil = Stencil::new(problem);
    let actions = (0..grid.len())
        .into_par_iter()
        .map(|node| {
            let prev = previous.map(|(pf, term)| (pf.actions[node], term));
            if grid.is_boundary(node) {
                let cands: Vec<(usize, T)> = inward_pairs(grid, &pairs, node)
                    .into_iter()
                    .map(|(p, t)| (p, (w[node] - w[t]) / grid.h() - pairs[p].lambda))
                    .collect();
                let Some((best, best_r)) = argmax(&cands) else {
                    return Action::Neumann(neumann_target(grid, node));
                };
                if let Some((Action::Transfer(cur), _)) = prev {
                    if let Some(&(_, r_cur)) = cands.iter().find(|(p, _)| *p == cur) {
                        if best_r <= r_cur + tol_switch {
                            return Action::Transfer(cur);
                        }
                    }
                }
                return Action::Transfer(best);
            }
            let residuals: Vec<(usize, T)> = pairs
                .iter()
                .enumerate()
                .filter_map(|(p, pair)| pair_residual(grid, w, node, pair).map(|r| (p, r)))
                .collect();
            let best = argmax(&residuals);
            match prev {
                Some((Action::Transfer(cur), term)) => {
                    let r_cur = residuals.iter().find(|(p, _)| *p == cur).map(|&(_, r)| r);
                    let (chosen, r_chosen) = match (r_cur, best) {
                        (Some(rc), Some((_, rb))) if rb <= rc + tol_switch => (cur, rc),
                        (_, Some((b, rb))) => (b, rb),
                        (_, None) => return Action::Diffuse,
                    };
                    let gen = stencil.apply(grid, w, node).expect("interior stencil");
                    let rho = grid.coords(node);
                    let diffuse = term.residual(w[node], gen, problem.running_cost(&rho));
                    if diffuse > r_chosen + tol_switch {
                        Action::Diffuse
                    } else {
                        Action::Transfer(chosen)
                    }
                }
                Some((_, _)) => match best {
                    Some((b, rb)) if rb > tol_switch => Action::Transfer(b),
                    _ => Action::Diffuse,
                },
                None => match best {
                    Some((b, rb)) if rb >= -tol_switch => Action::Transfer(b),
                    _ => Action::Diffuse,
                },
            }
        })
        .collect();
    PolicyField { actions }
}

/// Every transfer chain must end at a diffusing node.
pub(crate) fn check_chains<T: Scalar>(policy: &PolicyField, problem: &CorrectorProblem<T>) -> Result<()> {
    let grid = &problem.grid;
    let pairs = problem.pairs();
    if policy.diffuse_count() == 0 {
        return Err(Error::SingularSystem("policy has no diffusing node".into()));
    }
    // 0 = unseen, 1 = on current path, 2 = reaches a diffusing node
    let mut state = vec![0u8; grid.len()];
    let mut path = Vec::new();
    for start in 0..grid.len() {
        let mut k = start;
        loop {
            match state[k] {
                2 => break,
                1 => return Err(Error::SingularSystem(format!("transfer cycle through node {k}"))),
                _ => {}
            }
            let next = match policy.actions[k] {
                Action::Diffuse => None,
                Action::Transfer(p) => Some(grid.shift(k, &pairs[p].step).ok_or(Error::StencilOutOfDomain(k))?),
                Action::Neumann(t) => Some(t),
            };
            state[k] = 1;
            path.push(k);
            match next {
                Some(t) => k = t,
                None => break,
            }
        }
        for &k in &path {
            state[k] = 2;
        }
        path.clear();
    }
    Ok(())
}

/// One assembled row: `sum entries * w + a_coef * a = rhs`.
pub(crate) struct Row<T> {
    pub(crate) entries: Vec<(usize, T)>,
    pub(crate) a_coef: T,
    pub(crate) rhs: T,
}

pub(crate) fn assemble_row<T: Scalar>(
    problem: &CorrectorProblem<T>,
    stencil: &Stencil<T>,
    pairs: &[TransferPair<T>],
    action: Action,
    node: usize,
    discount: Option<T>,
) -> Result<Row<T>> {
    let grid = &problem.grid;
    Ok(match action {
        Action::Diffuse => {
            let nb = stencil.neighbors(grid, node).ok_or(Error::StencilOutOfDomain(node))?;
            let mut entries = Vec::with_capacity(nb.len() + 1);
            entries.push((node, stencil.total + discount.unwrap_or_else(T::zero)));
            entries.extend(nb.into_iter().map(|(k, c)| (k, -c)));
            let a_coef = if discount.is_some() { T::zero() } else { T::one() };
            Row { entries, a_coef, rhs: problem.running_cost(&grid.coords(node)) }
        }
        Action::Transfer(p) => {
            let t = grid.shift(node, &pairs[p].step).ok_or(Error::StencilOutOfDomain(node))?;
            Row { entries: vec![(node, T::one()), (t, -T::one())], a_coef: T::zero(), rhs: grid.h() * pairs[p].lambda }
        }
        Action::Neumann(t) => Row { entries: vec![(node, T::one()), (t, -T::one())], a_coef: T::zero(), rhs: T::zero() },
    })
}

pub(crate) fn make_solver<T: Scalar>(a: CsrMatrix<T>, opts: &SolverOptions<T>) -> Result<Box<dyn LinearSolver<T>>> {
    let direct = match opts.backend {
        Backend::Direct => true,
        Backend::Krylov => false,
        Backend::Auto => a.n_rows() <= opts.direct_limit,
    };
    if direct {
        Ok(Box::new(BandedMatrix::from_csr(&a).factorize()?))
    } else {
        Ok(Box::new(BiCgStab::new(a, opts.krylov_rel_tol, opts.krylov_max_iters)?))
    }
}

/// Largest scaled residual of the assembled rows at `(w, a)`.
pub(crate) fn relative_row_residual<T: Scalar>(rows: &[Row<T>], w: &[T], a: T) -> T {
    rows.iter()
        .map(|row| {
            let mut s = row.a_coef * a - row.rhs;
            let mut scale = (row.a_coef * a).abs() + row.rhs.abs();
            for &(k, v) in &row.entries {
                s += v * w[k];
                scale += (v * w[k]).abs();
            }
            if scale > T::zero() {
                s.abs() / scale
            } else {
                s.abs()
            }
        })
        .fold(T::zero(), T::max)
}

/// Solves the linear system of a fixed policy for `(w, a)` with `w(0) = 0`.
pub fn evaluate_policy<T: Scalar>(policy: &PolicyField, problem: &CorrectorProblem<T>, opts: &SolverOptions<T>) -> Result<(Vec<T>, T)> {
    check_chains(policy, problem)?;
    let grid = &problem.grid;
    let n = grid.len();
    let stencil = Stencil::new(problem);
    let pairs = problem.pairs();
    let center = grid.center();
    let rows: Vec<Row<T>> = (0..n)
        .into_par_iter()
        .map(|k| assemble_row(problem, &stencil, &pairs, policy.actions[k], k, None))
        .collect::<Result<_>>()?;

    // Pinning w at a diffusing node (the one closest to the center) replaces
    // that node's row inside the band; its own equation becomes the border
    // row. Pinning a transfer node could leave the diffusing class closed
    // and the banded block singular.
    let pin = (0..n)
        .filter(|&k| policy.actions[k] == Action::Diffuse)
        .min_by_key(|&k| (grid.l1_steps(k), k))
        .ok_or_else(|| Error::SingularSystem("policy has no diffusing node".into()))?;
    let mut b = CsrMatrix::new(n);
    let mut col = vec![T::zero(); n];
    let mut f = vec![T::zero(); n];
    let mut buf = Vec::new();
    for (k, row) in rows.iter().enumerate() {
        if k == pin {
            buf.push((k, T::one()));
        } else {
            buf.extend_from_slice(&row.entries);
            col[k] = row.a_coef;
            f[k] = row.rhs;
        }
        b.push_row(&mut buf);
    }
    let border = &rows[pin];
    let solver = make_solver(b, opts)?;
    let (mut w, a) = solve_bordered(solver.as_ref(), &col, &border.entries, border.a_coef, &f, border.rhs)?;
    let shift = w[center];
    w.iter_mut().for_each(|x| *x -= shift);
    w[center] = T::zero();

    let check = relative_row_residual(&rows, &w, a);
    if !(check <= T::epsilon().sqrt()) {
        return Err(Error::LinearSolveFailure(format!("policy evaluation residual {check:e}")));
    }
    Ok((w, a))
}

/// Howard policy iteration from the all-diffuse interior policy.
pub fn solve_policy_iteration<T: Scalar>(problem: &CorrectorProblem<T>, opts: &SolverOptions<T>) -> Result<CorrectorSolution<T>> {
    problem.validate()?;
    let tol_switch = opts.tol_switch(problem);
    let mut policy = initial_policy(problem);
    let mut history: Vec<T> = Vec::new();
    for iter in 1..=opts.max_iters {
        let (w, a) = evaluate_policy(&policy, problem, opts)?;
        history.push(a);
        let next = improve_policy(&w, problem, Some((&policy, DiffuseTerm::Ergodic(a))), tol_switch);
        // An unchanged policy re-evaluates to the same (w, a), so the
        // eigenvalue test is implied.
        if next == policy {
            return finish(problem, opts, w, a, policy, history, iter);
        }
        policy = next;
    }
    Err(Error::MaxItersExceeded(opts.max_iters))
}

fn finish<T: Scalar>(
    problem: &CorrectorProblem<T>,
    opts: &SolverOptions<T>,
    w: Vec<T>,
    a_bar: T,
    policy: PolicyField,
    a_history: Vec<T>,
    iterations: usize,
) -> Result<CorrectorSolution<T>> {
    let grid = &problem.grid;
    let pairs = problem.pairs();
    let stencil = Stencil::new(problem);
    let tol_switch = opts.tol_switch(problem);
    let tol_bind = opts.tol_bind(problem);

    let per_node: Vec<(Vec<(usize, usize)>, T)> = (0..grid.len())
        .into_par_iter()
        .map(|node| {
            let mut binding = Vec::new();
            let mut worst = T::zero();
            for pair in &pairs {
                if let Some(r) = pair_residual(grid, &w, node, pair) {
                    if r.abs() <= tol_bind {
                        binding.push((pair.from, pair.to));
                    }
                    worst = worst.max(r);
                }
            }
            let own = match policy.actions[node] {
                Action::Diffuse => {
                    let gen = stencil.apply(grid, &w, node).unwrap_or_else(T::zero);
                    (a_bar - gen - problem.running_cost(&grid.coords(node))).abs()
                }
                Action::Transfer(p) => {
                    let r = pair_residual(grid, &w, node, &pairs[p]).map_or(T::zero(), T::abs);
                    let diffuse = stencil
                        .apply(grid, &w, node)
                        .map_or(T::zero(), |gen| a_bar - gen - problem.running_cost(&grid.coords(node)));
                    r.max(diffuse)
                }
                Action::Neumann(t) => (w[node] - w[t]).abs(),
            };
            (binding, worst.max(own))
        })
        .collect();
    let residual_norm = per_node.iter().fold(T::zero(), |m, (_, r)| m.max(*r));
    let binding_sets: Vec<_> = per_node.into_iter().map(|(b, _)| b).collect();

    if opts.check_domain {
        let loose = (0..grid.len()).filter(|&k| grid.boundary_distance(k) <= 2 && binding_sets[k].is_empty()).count();
        if loose > 0 {
            return Err(Error::DomainTooSmall(loose));
        }
    }
    let neumann_nodes = policy.actions.iter().filter(|a| matches!(a, Action::Neumann(_))).count();
    Ok(CorrectorSolution {
        grid: grid.clone(),
        w,
        a_bar,
        policy,
        binding_sets,
        iterations,
        residual_norm,
        a_history,
        tol_switch,
        tol_bind,
        non_monotone: stencil.non_monotone,
        neumann_nodes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;
    use crate::market::CostMatrix;
    use crate::oracles::solve_1d_closed_form;

    fn one_dim(lambda: f64, radius: f64, n: usize) -> CorrectorProblem<f64> {
        let one = Matrix::identity(1);
        CorrectorProblem::new(one.clone(), one, CostMatrix::uniform(1, lambda).unwrap(), radius, n).unwrap()
    }

    /// Transfers toward the center everywhere except at the center.
    fn inward_policy(problem: &CorrectorProblem<f64>) -> PolicyField {
        let g = &problem.grid;
        let actions = (0..g.len())
            .map(|k| match g.coord(k, 0) {
                x if x > 0.0 => Action::Transfer(1),
                x if x < 0.0 => Action::Transfer(0),
                _ => Action::Diffuse,
            })
            .collect();
        PolicyField { actions }
    }

    #[test]
    fn hand_solved_small_system() {
        let p = one_dim(0.001, 0.2, 5);
        let (w, a) = evaluate_policy(&inward_policy(&p), &p, &SolverOptions::default()).unwrap();
        assert!((a - 0.01).abs() < 1e-15);
        let expected = [0.0002, 0.0001, 0.0, 0.0001, 0.0002];
        for (x, e) in w.iter().zip(expected) {
            assert!((x - e).abs() < 1e-16);
        }
    }

    #[test]
    fn costless_policy_evaluation_is_zero() {
        let p = one_dim(0.0, 0.2, 5);
        let (w, a) = evaluate_policy(&inward_policy(&p), &p, &SolverOptions::default()).unwrap();
        assert_eq!(a, 0.0);
        assert!(w.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn transfer_cycle_is_singular() {
        let p = one_dim(0.001, 0.2, 5);
        let mut policy = inward_policy(&p);
        policy.actions[3] = Action::Transfer(0);
        policy.actions[4] = Action::Transfer(1);
        assert!(matches!(evaluate_policy(&policy, &p, &SolverOptions::default()), Err(Error::SingularSystem(_))));
        let none = PolicyField { actions: vec![Action::Transfer(0); 5] };
        assert!(matches!(evaluate_policy(&none, &p, &SolverOptions::default()), Err(Error::SingularSystem(_))));
    }

    #[test]
    fn flat_field_diffuses_inside() {
        let one = Matrix::identity(2);
        let p = CorrectorProblem::new(one.clone(), one, CostMatrix::uniform(2, 0.001).unwrap(), 1.0, 7).unwrap();
        let policy = improve_policy(&vec![0.0; p.grid.len()], &p, None, 1e-10);
        for k in 0..p.grid.len() {
            match policy.actions[k] {
                Action::Diffuse => assert!(!p.grid.is_boundary(k)),
                Action::Transfer(_) => assert!(p.grid.is_boundary(k)),
                Action::Neumann(_) => panic!("all boundary nodes have an inward transfer"),
            }
        }
    }

    #[test]
    fn ties_go_to_the_smaller_pair() {
        let one = Matrix::identity(2);
        let p = CorrectorProblem::new(one.clone(), one, CostMatrix::uniform(2, 0.001).unwrap(), 1.0, 7).unwrap();
        let w: Vec<f64> = (0..p.grid.len()).map(|k| p.grid.coord(k, 0) + p.grid.coord(k, 1)).collect();
        let policy = improve_policy(&w, &p, None, 1e-10);
        let pairs = p.pairs();
        let Action::Transfer(idx) = policy.actions[p.grid.center()] else { panic!("center should transfer") };
        assert_eq!((pairs[idx].from, pairs[idx].to), (1, 0));
    }

    #[test]
    fn oracle_field_selects_expected_actions() {
        let p = one_dim(0.001, 0.35, 141);
        let oracle = solve_1d_closed_form(1.0, 1.0, 0.001, 0.001).unwrap();
        let w: Vec<f64> = (0..p.grid.len()).map(|k| oracle.w(p.grid.coord(k, 0))).collect();
        let policy = improve_policy(&w, &p, None, 1e-10);
        let h = p.grid.h();
        for k in 0..p.grid.len() {
            let x = p.grid.coord(k, 0);
            if x >= oracle.rho_plus + 2.0 * h {
                assert_eq!(policy.actions[k], Action::Transfer(1));
            } else if x <= -oracle.rho_plus - 2.0 * h {
                assert_eq!(policy.actions[k], Action::Transfer(0));
            } else if x.abs() <= oracle.rho_plus - 2.0 * h {
                assert_eq!(policy.actions[k], Action::Diffuse);
            }
        }
    }

    #[test]
    fn one_dimensional_standard_instance() {
        let p = one_dim(0.001, 0.35, 141);
        let sol = solve_policy_iteration(&p, &SolverOptions::default()).unwrap();
        let oracle = solve_1d_closed_form(1.0, 1.0, 0.001, 0.001).unwrap();
        assert!((sol.a_bar / oracle.a_bar - 1.0).abs() < 0.02);
        let edge = sol.nt_nodes().iter().map(|&k| p.grid.coord(k, 0)).fold(0.0, f64::max);
        assert!((edge - oracle.rho_plus).abs() <= 2.0 * p.grid.h());
        assert_eq!(sol.w[p.grid.center()], 0.0);
        assert!(sol.a_history.windows(2).all(|s| s[1] <= s[0] + 1e-12));
    }

    #[test]
    fn free_transfers_cost_nothing() {
        let p = one_dim(0.0, 0.35, 41);
        let opts = SolverOptions { check_domain: false, ..Default::default() };
        let sol = solve_policy_iteration(&p, &opts).unwrap();
        assert!(sol.a_bar.abs() <= opts.tol_a(sol.a_bar));
        assert!(sol.w.iter().all(|x| x.abs() <= 1e-10));
    }

    #[test]
    fn krylov_and_direct_agree() {
        let s = Matrix::<f64>::from_f64_rows(&[vec![1.0, 0.2], vec![0.2, 0.9]]).unwrap();
        let lam = CostMatrix::from_f64_rows(&[vec![0.0, 0.001, 0.002], vec![0.001, 0.0, 0.002], vec![0.002, 0.001, 0.0]]).unwrap();
        let p = CorrectorProblem::with_auto_radius(s.clone(), s, lam, 41).unwrap();
        let direct = solve_policy_iteration(&p, &SolverOptions { backend: Backend::Direct, ..Default::default() }).unwrap();
        let krylov = solve_policy_iteration(&p, &SolverOptions { backend: Backend::Krylov, ..Default::default() }).unwrap();
        assert!((direct.a_bar - krylov.a_bar).abs() < 1e-9 * direct.a_bar);
        let gap = direct.w.iter().zip(&krylov.w).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(gap < 1e-9);
    }

    #[test]
    fn single_precision_instance() {
        let one = Matrix::<f32>::identity(1);
        let p = CorrectorProblem::new(one.clone(), one, CostMatrix::uniform(1, 0.001).unwrap(), 0.35f32, 141).unwrap();
        let sol = solve_policy_iteration(&p, &SolverOptions::default()).unwrap();
        assert!((sol.a_bar / 0.006551853f32 - 1.0).abs() < 0.02);
    }
}
