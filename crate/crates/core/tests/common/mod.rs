//! Brute-force oracles shared by the integration tests. Nothing here calls
//! into the solvers under test.

#![allow(dead_code)]

use anarchy::rational::{int, zero, Rational};

/// All permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for v in 0..used.len() {
            if !used[v] {
                used[v] = true;
                prefix.push(v);
                go(prefix, used, out);
                prefix.pop();
                used[v] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

pub fn fixed_point_free(n: usize) -> Vec<Vec<usize>> {
    permutations(n).into_iter().filter(|p| p.iter().enumerate().all(|(u, &v)| u != v)).collect()
}

pub fn is_cover(succ: &[usize]) -> bool {
    let n = succ.len();
    let mut hit = vec![false; n];
    succ.iter().enumerate().all(|(u, &v)| v < n && v != u && !std::mem::replace(&mut hit[v], true))
}

pub fn succ_weight(w: &[Vec<Rational>], succ: &[usize]) -> Rational {
    succ.iter().enumerate().map(|(u, &v)| &w[u][v]).sum()
}

/// Raw gadget enumeration: each pair `{u, v}` is unused, forward, backward,
/// both-out or both-in, and every vertex ends with exactly one outgoing and
/// one incoming half. Returns `(out, in)` neighbour vectors.
pub fn raw_half_edge_covers(n: usize) -> Vec<(Vec<usize>, Vec<usize>)> {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
    let mut out = Vec::new();
    let mut o: Vec<Option<usize>> = vec![None; n];
    let mut i: Vec<Option<usize>> = vec![None; n];
    fn go(k: usize, pairs: &[(usize, usize)], o: &mut [Option<usize>], i: &mut [Option<usize>], acc: &mut Vec<(Vec<usize>, Vec<usize>)>) {
        if k == pairs.len() {
            if o.iter().chain(i.iter()).all(Option::is_some) {
                acc.push((o.iter().map(|x| x.unwrap()).collect(), i.iter().map(|x| x.unwrap()).collect()));
            }
            return;
        }
        let (u, v) = pairs[k];
        go(k + 1, pairs, o, i, acc);
        // (who gets an out-half, who gets an in-half) on this pair.
        let states: [(&[usize], &[usize]); 4] = [(&[u], &[v]), (&[v], &[u]), (&[u, v], &[]), (&[], &[u, v])];
        for (outs, ins) in states {
            if outs.iter().any(|&x| o[x].is_some()) || ins.iter().any(|&x| i[x].is_some()) {
                continue;
            }
            let other = |x: usize| if x == u { v } else { u };
            for &x in outs {
                o[x] = Some(other(x));
            }
            for &x in ins {
                i[x] = Some(other(x));
            }
            go(k + 1, pairs, o, i, acc);
            for &x in outs {
                o[x] = None;
            }
            for &x in ins {
                i[x] = None;
            }
        }
    }
    go(0, &pairs, &mut o, &mut i, &mut out);
    out
}

pub fn half_weight(w: &[Vec<Rational>], out: &[usize], inn: &[usize]) -> Rational {
    let total: Rational = (0..out.len()).map(|u| &w[u][out[u]] + &w[inn[u]][u]).sum();
    total / int(2)
}

/// Best raw half-edge weight, optionally requiring the full edge `(a, b)`.
pub fn best_half_edge(w: &[Vec<Rational>], covers: &[(Vec<usize>, Vec<usize>)], forced: Option<(usize, usize)>) -> Option<Rational> {
    covers
        .iter()
        .filter(|(o, i)| forced.map_or(true, |(a, b)| o[a] == b && i[b] == a))
        .map(|(o, i)| half_weight(w, o, i))
        .max()
}

/// Dense LP optimum `max c x, A x <= b, x >= 0` by enumerating every basis
/// of tight constraints. `None` when nothing is feasible.
pub fn lp_by_vertices(c: &[Rational], a: &[Vec<Rational>], b: &[Rational]) -> Option<Rational> {
    let nv = c.len();
    let mut rows: Vec<(Vec<Rational>, Rational)> = a.iter().cloned().zip(b.iter().cloned()).collect();
    for j in 0..nv {
        let mut e = vec![zero(); nv];
        e[j] = int(-1);
        rows.push((e, zero()));
    }
    let mut best: Option<Rational> = None;
    let mut pick = Vec::new();
    fn choose(start: usize, left: usize, total: usize, pick: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
        if left == 0 {
            f(pick);
            return;
        }
        for r in start..total {
            pick.push(r);
            choose(r + 1, left - 1, total, pick, f);
            pick.pop();
        }
    }
    choose(0, nv, rows.len(), &mut pick, &mut |set| {
        let m: Vec<Vec<Rational>> = set.iter().map(|&r| rows[r].0.clone()).collect();
        let rhs: Vec<Rational> = set.iter().map(|&r| rows[r].1.clone()).collect();
        let Some(x) = solve_square(m, rhs) else { return };
        let feasible = rows.iter().all(|(row, bound)| row.iter().zip(&x).map(|(p, q)| p * q).sum::<Rational>() <= *bound);
        if feasible {
            let v: Rational = c.iter().zip(&x).map(|(p, q)| p * q).sum();
            if best.as_ref().map_or(true, |b| v > *b) {
                best = Some(v);
            }
        }
    });
    best
}

/// Gauss-Jordan on a square system; `None` when singular.
pub fn solve_square(mut m: Vec<Vec<Rational>>, mut rhs: Vec<Rational>) -> Option<Vec<Rational>> {
    let n = rhs.len();
    for col in 0..n {
        let p = (col..n).find(|&r| m[r][col] != zero())?;
        m.swap(col, p);
        rhs.swap(col, p);
        let pivot = m[col][col].clone();
        for x in m[col].iter_mut() {
            *x /= &pivot;
        }
        rhs[col] /= &pivot;
        for r in 0..n {
            if r != col && m[r][col] != zero() {
                let f = m[r][col].clone();
                for k in 0..n {
                    let d = &f * &m[col][k];
                    m[r][k] -= d;
                }
                let d = &f * &rhs[col];
                rhs[r] -= d;
            }
        }
    }
    Some(rhs)
}
