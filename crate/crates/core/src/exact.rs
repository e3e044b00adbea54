//! Exhaustive ring state spaces, exact generators and the absorption and
//! stationary laws obtained from them by rational linear algebra.

use std::collections::{BTreeMap, HashMap};
use std::str::FromStr;

use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};
use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};

use crate::dynamics::{bond_count, bond_enabled, Direction, Model};
use crate::error::{Error, Result};
use crate::lattice::{LatticeConfig, Topology};

pub const MAX_SITES: usize = 16;
/// Largest strongly connected block handled by exact elimination.
pub const MAX_EXACT_BLOCK: usize = 3000;
pub const MAX_EXPONENTIAL_STATES: usize = 10_000;

/// All ring configurations with `particles` particles on `len` sites, in
/// lexicographic order of their bit strings.
#[derive(Clone, Debug)]
pub struct StateSpace {
    len: usize,
    particles: usize,
    masks: Vec<u32>,
    index: HashMap<u32, usize>,
}

impl StateSpace {
    pub fn len(&self) -> usize {
        self.masks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masks.is_empty()
    }

    pub fn sites(&self) -> usize {
        self.len
    }

    pub fn particles(&self) -> usize {
        self.particles
    }

    /// Site `i` is bit `L - 1 - i`, so numeric order is string order.
    fn mask_of(&self, sites: &[u8]) -> u32 {
        sites.iter().fold(0u32, |m, &s| (m << 1) | u32::from(s))
    }

    fn sites_of(&self, mask: u32) -> Vec<u8> {
        (0..self.len).map(|i| ((mask >> (self.len - 1 - i)) & 1) as u8).collect()
    }

    pub fn config(&self, idx: usize) -> LatticeConfig {
        LatticeConfig::new(Topology::Ring, self.sites_of(self.masks[idx])).expect("binary sites")
    }

    pub fn index_of(&self, cfg: &LatticeConfig) -> Option<usize> {
        if cfg.len() != self.len || !cfg.is_ring() {
            return None;
        }
        self.index.get(&self.mask_of(cfg.sites())).copied()
    }

    pub fn configs(&self) -> impl Iterator<Item = LatticeConfig> + '_ {
        (0..self.len()).map(|i| self.config(i))
    }
}

pub fn enumerate_states(len: usize, particles: usize) -> Result<StateSpace> {
    if len == 0 || len > MAX_SITES {
        return Err(Error::TooLarge(format!("ring of {len} sites (limit {MAX_SITES})")));
    }
    if particles > len {
        return Err(Error::InvalidCount {
            particles,
            sites: len,
        });
    }
    let masks: Vec<u32> = (0u32..1 << len).filter(|m| m.count_ones() as usize == particles).collect();
    let index = masks.iter().enumerate().map(|(i, &m)| (m, i)).collect();
    Ok(StateSpace {
        len,
        particles,
        masks,
        index,
    })
}

/// Parses `"3/4"`, `"1"` or a decimal such as `"0.25"` into an exact rational.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let bad = || Error::InvalidParameter(format!("cannot read `{s}` as a rational number"));
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n = BigInt::from_str(n.trim()).map_err(|_| bad())?;
        let d = BigInt::from_str(d.trim()).map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(n, d));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        let digits = format!("{whole}{frac}");
        let n = BigInt::from_str(&digits).map_err(|_| bad())?;
        let d = num::pow(BigInt::from(10), frac.len());
        return Ok(BigRational::new(n, d));
    }
    Ok(BigRational::from_integer(BigInt::from_str(s).map_err(|_| bad())?))
}

/// Off-diagonal rates `q(s, s')` with the diagonal implied by zero row sums.
#[derive(Clone, Debug)]
pub struct GeneratorMatrix {
    pub model: Model,
    pub p: BigRational,
    rows: Vec<Vec<(usize, BigRational)>>,
}

impl GeneratorMatrix {
    pub fn size(&self) -> usize {
        self.rows.len()
    }

    /// Positive off-diagonal entries of row `s`.
    pub fn row(&self, s: usize) -> &[(usize, BigRational)] {
        &self.rows[s]
    }

    pub fn exit_rate(&self, s: usize) -> BigRational {
        self.rows[s].iter().map(|(_, r)| r).sum()
    }

    pub fn entry(&self, s: usize, t: usize) -> BigRational {
        if s == t {
            return -self.exit_rate(s);
        }
        self.rows[s]
            .iter()
            .filter(|(j, _)| *j == t)
            .map(|(_, r)| r.clone())
            .sum()
    }
}

pub fn build_generator(space: &StateSpace, p: &BigRational, model: Model) -> Result<GeneratorMatrix> {
    if p.is_negative() || *p > BigRational::one() {
        return Err(Error::InvalidParameter(format!("p = {p} outside [0, 1]")));
    }
    let q = BigRational::one() - p;
    let l = space.len;
    let rows = space
        .masks
        .iter()
        .map(|&m| {
            let sites = space.sites_of(m);
            let mut row: BTreeMap<usize, BigRational> = BTreeMap::new();
            for b in 0..bond_count(l, true) {
                let (r, lft) = bond_enabled(&sites, true, model, b);
                for (on, dir) in [(r, Direction::Right), (lft, Direction::Left)] {
                    let rate = match dir {
                        Direction::Right => p,
                        Direction::Left => &q,
                    };
                    if !on || rate.is_zero() {
                        continue;
                    }
                    let mut next = sites.clone();
                    next.swap(b, (b + 1) % l);
                    let t = space.index[&space.mask_of(&next)];
                    *row.entry(t).or_insert_with(BigRational::zero) += rate;
                }
            }
            row.into_iter().collect()
        })
        .collect();
    Ok(GeneratorMatrix {
        model,
        p: p.clone(),
        rows,
    })
}

/// Exact law on state indices; zero weights are omitted.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct ExactDistribution {
    pub weights: BTreeMap<usize, BigRational>,
}

impl ExactDistribution {
    pub fn uniform(space: &StateSpace) -> Self {
        let w = BigRational::new(BigInt::one(), BigInt::from(space.len()));
        Self {
            weights: (0..space.len()).map(|i| (i, w.clone())).collect(),
        }
    }

    pub fn point(idx: usize) -> Self {
        Self {
            weights: [(idx, BigRational::one())].into_iter().collect(),
        }
    }

    pub fn total(&self) -> BigRational {
        self.weights.values().sum()
    }

    pub fn by_config(&self, space: &StateSpace) -> BTreeMap<LatticeConfig, BigRational> {
        self.weights.iter().map(|(&i, w)| (space.config(i), w.clone())).collect()
    }

    pub fn to_dense_f64(&self, size: usize) -> Vec<f64> {
        let mut v = vec![0.0; size];
        for (&i, w) in &self.weights {
            v[i] = w.to_f64().unwrap_or(f64::NAN);
        }
        v
    }

    fn from_dense(v: Vec<BigRational>) -> Self {
        Self {
            weights: v.into_iter().enumerate().filter(|(_, w)| !w.is_zero()).collect(),
        }
    }
}

struct Classes {
    /// Strongly connected components, sources first.
    order: Vec<Vec<usize>>,
    class_of: Vec<usize>,
}

impl Classes {
    fn new(gen: &GeneratorMatrix) -> Self {
        let n = gen.size();
        let mut g: DiGraph<(), ()> = DiGraph::with_capacity(n, 0);
        for _ in 0..n {
            g.add_node(());
        }
        for s in 0..n {
            for (t, _) in gen.row(s) {
                g.add_edge(NodeIndex::new(s), NodeIndex::new(*t), ());
            }
        }
        let mut order: Vec<Vec<usize>> = tarjan_scc(&g)
            .into_iter()
            .map(|c| {
                let mut v: Vec<usize> = c.into_iter().map(|x| x.index()).collect();
                v.sort_unstable();
                v
            })
            .collect();
        order.reverse();
        let mut class_of = vec![0; n];
        for (k, c) in order.iter().enumerate() {
            for &s in c {
                class_of[s] = k;
            }
        }
        Self { order, class_of }
    }

    fn is_closed(&self, k: usize, gen: &GeneratorMatrix) -> bool {
        self.order[k]
            .iter()
            .all(|&s| gen.row(s).iter().all(|(t, _)| self.class_of[*t] == k))
    }
}

/// Solves `x A = b` for square `A` by exact Gaussian elimination.
fn solve_left(a: &[Vec<BigRational>], b: &[BigRational]) -> Option<Vec<BigRational>> {
    let n = b.len();
    // x A = b  <=>  A^T x^T = b^T
    let mut m: Vec<Vec<BigRational>> = (0..n)
        .map(|i| {
            let mut row: Vec<BigRational> = (0..n).map(|j| a[j][i].clone()).collect();
            row.push(b[i].clone());
            row
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, pivot);
        let inv = BigRational::one() / &m[col][col];
        for x in m[col][col..].iter_mut() {
            *x *= &inv;
        }
        let pivot_row = m[col].clone();
        for (r, row) in m.iter_mut().enumerate() {
            if r == col || row[col].is_zero() {
                continue;
            }
            let f = row[col].clone();
            for (x, y) in row[col..].iter_mut().zip(&pivot_row[col..]) {
                if !y.is_zero() {
                    *x -= &f * y;
                }
            }
        }
    }
    Some(m.into_iter().map(|mut row| row.pop().unwrap()).collect())
}

fn check_block(size: usize) -> Result<()> {
    if size > MAX_EXACT_BLOCK {
        return Err(Error::TooLarge(format!(
            "strongly connected block of {size} states (exact limit {MAX_EXACT_BLOCK})"
        )));
    }
    Ok(())
}

fn block_matrix(gen: &GeneratorMatrix, class: &[usize], pos: &HashMap<usize, usize>) -> Vec<Vec<BigRational>> {
    let k = class.len();
    let mut a = vec![vec![BigRational::zero(); k]; k];
    for (i, &s) in class.iter().enumerate() {
        a[i][i] = -gen.exit_rate(s);
        for (t, r) in gen.row(s) {
            if let Some(&j) = pos.get(t) {
                a[i][j] += r;
            }
        }
    }
    a
}

/// Law of the absorbing state eventually reached from `initial`.
pub fn absorption_distribution(
    initial: &ExactDistribution,
    gen: &GeneratorMatrix,
    space: &StateSpace,
) -> Result<ExactDistribution> {
    let classes = Classes::new(gen);
    for (k, c) in classes.order.iter().enumerate() {
        if classes.is_closed(k, gen) && !(c.len() == 1 && space.config(c[0]).is_frozen()) {
            return Err(Error::NotAbsorbing(c.len()));
        }
    }
    let mut mass = vec![BigRational::zero(); gen.size()];
    for (&i, w) in &initial.weights {
        mass[i] += w;
    }
    for (k, class) in classes.order.iter().enumerate() {
        if classes.is_closed(k, gen) || class.iter().all(|&s| mass[s].is_zero()) {
            continue;
        }
        // expected occupation times y solve y (-Q_CC) = m_C
        let occupation: Vec<BigRational> = if class.len() == 1 {
            let s = class[0];
            vec![&mass[s] / gen.exit_rate(s)]
        } else {
            check_block(class.len())?;
            let pos: HashMap<usize, usize> = class.iter().enumerate().map(|(i, &s)| (s, i)).collect();
            let neg: Vec<Vec<BigRational>> = block_matrix(gen, class, &pos)
                .into_iter()
                .map(|row| row.into_iter().map(|x| -x).collect())
                .collect();
            let rhs: Vec<BigRational> = class.iter().map(|&s| mass[s].clone()).collect();
            solve_left(&neg, &rhs).ok_or(Error::NotAbsorbing(class.len()))?
        };
        for (&s, y) in class.iter().zip(&occupation) {
            if y.is_zero() {
                continue;
            }
            for (t, r) in gen.row(s) {
                if classes.class_of[*t] != k {
                    mass[*t] += y * r;
                }
            }
        }
        for &s in class {
            mass[s] = BigRational::zero();
        }
    }
    Ok(ExactDistribution::from_dense(mass))
}

/// The unique stationary law, supported on the single closed class.
pub fn stationary_distribution(gen: &GeneratorMatrix) -> Result<ExactDistribution> {
    let classes = Classes::new(gen);
    let closed: Vec<usize> = (0..classes.order.len()).filter(|&k| classes.is_closed(k, gen)).collect();
    if closed.len() != 1 {
        return Err(Error::Reducible(closed.iter().map(|&k| classes.order[k].clone()).collect()));
    }
    let class = &classes.order[closed[0]];
    check_block(class.len())?;
    let pos: HashMap<usize, usize> = class.iter().enumerate().map(|(i, &s)| (s, i)).collect();
    let mut a = block_matrix(gen, class, &pos);
    // replace the last equation of pi Q = 0 by sum(pi) = 1
    let k = class.len();
    for row in a.iter_mut() {
        row[k - 1] = BigRational::one();
    }
    let mut rhs = vec![BigRational::zero(); k];
    rhs[k - 1] = BigRational::one();
    let pi = solve_left(&a, &rhs).ok_or(Error::Reducible(vec![class.clone()]))?;
    let mut dense = vec![BigRational::zero(); gen.size()];
    for (&s, w) in class.iter().zip(pi) {
        dense[s] = w;
    }
    Ok(ExactDistribution::from_dense(dense))
}

/// `initial · exp(t Q)` by uniformization.
pub fn marginal_at_time(initial: &[f64], gen: &GeneratorMatrix, t: f64) -> Result<Vec<f64>> {
    let n = gen.size();
    if n > MAX_EXPONENTIAL_STATES {
        return Err(Error::TooLarge(format!("{n} states (limit {MAX_EXPONENTIAL_STATES})")));
    }
    if initial.len() != n || t.is_nan() || t < 0.0 {
        return Err(Error::InvalidParameter("initial vector or time out of range".into()));
    }
    let rows: Vec<Vec<(usize, f64)>> = (0..n)
        .map(|s| gen.row(s).iter().map(|(j, r)| (*j, r.to_f64().unwrap())).collect())
        .collect();
    let exit: Vec<f64> = rows.iter().map(|r| r.iter().map(|x| x.1).sum()).collect();
    let lambda = exit.iter().cloned().fold(0.0, f64::max);
    if lambda == 0.0 || t == 0.0 {
        return Ok(initial.to_vec());
    }
    let jump = |v: &[f64]| -> Vec<f64> {
        let mut out: Vec<f64> = v.iter().zip(&exit).map(|(x, e)| x * (1.0 - e / lambda)).collect();
        for (s, row) in rows.iter().enumerate() {
            if v[s] == 0.0 {
                continue;
            }
            for &(j, r) in row {
                out[j] += v[s] * r / lambda;
            }
        }
        out
    };
    let chunks = (lambda * t / 20.0).ceil().max(1.0) as usize;
    let mu = lambda * t / chunks as f64;
    let mut v = initial.to_vec();
    for _ in 0..chunks {
        let mut weight = (-mu).exp();
        let mut acc: Vec<f64> = v.iter().map(|x| x * weight).collect();
        let mut term = v.clone();
        let mut seen = weight;
        let mut k = 0u32;
        while 1.0 - seen > 1e-15 && k < 10_000 {
            k += 1;
            term = jump(&term);
            weight *= mu / k as f64;
            seen += weight;
            for (a, x) in acc.iter_mut().zip(&term) {
                *a += weight * x;
            }
        }
        v = acc;
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tasep::ring_final_measure;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn ring(b: &str) -> LatticeConfig {
        LatticeConfig::ring(b).unwrap()
    }

    #[test]
    fn state_counts() {
        assert_eq!(enumerate_states(4, 2).unwrap().len(), 6);
        assert_eq!(enumerate_states(5, 2).unwrap().len(), 10);
        assert_eq!(enumerate_states(8, 3).unwrap().len(), 56);
        assert!(matches!(enumerate_states(17, 3), Err(Error::TooLarge(_))));
        let s = enumerate_states(4, 2).unwrap();
        let bits: Vec<String> = s.configs().map(|c| c.bits()).collect();
        assert_eq!(bits, ["0011", "0101", "0110", "1001", "1010", "1100"]);
        assert_eq!(s.index_of(&ring("1010")), Some(4));
    }

    #[test]
    fn rationals() {
        assert_eq!(parse_rational("3/4").unwrap(), q(3, 4));
        assert_eq!(parse_rational("0.25").unwrap(), q(1, 4));
        assert_eq!(parse_rational("1").unwrap(), q(1, 1));
        assert!(parse_rational("x").is_err());
        assert!(parse_rational("1/0").is_err());
    }

    #[test]
    fn generator_rows() {
        let s = enumerate_states(4, 2).unwrap();
        let g = build_generator(&s, &q(1, 3), Model::Fasep).unwrap();
        let i = s.index_of(&ring("1100")).unwrap();
        let row: Vec<(String, BigRational)> = g.row(i).iter().map(|(j, r)| (s.config(*j).bits(), r.clone())).collect();
        assert_eq!(row, vec![("0101".into(), q(2, 3)), ("1010".into(), q(1, 3))]);
        assert!(g.row(s.index_of(&ring("1010")).unwrap()).is_empty());
        assert_eq!(g.entry(i, i), -q(1, 1));
        let a = build_generator(&s, &q(1, 1), Model::Asep).unwrap();
        let row: Vec<String> = a.row(i).iter().map(|(j, _)| s.config(*j).bits()).collect();
        assert_eq!(row, vec!["1010"]);
        for st in 0..s.len() {
            let sum: BigRational = (0..s.len()).map(|t| a.entry(st, t)).sum();
            assert!(sum.is_zero());
        }
    }

    #[test]
    fn small_absorption() {
        for p in [q(0, 1), q(1, 3), q(1, 1)] {
            let s = enumerate_states(5, 2).unwrap();
            let g = build_generator(&s, &p, Model::Fasep).unwrap();
            let d = absorption_distribution(&ExactDistribution::uniform(&s), &g, &s).unwrap();
            assert_eq!(d.weights.len(), 5);
            assert!(d.weights.values().all(|w| *w == q(1, 5)));
            let s = enumerate_states(4, 2).unwrap();
            let g = build_generator(&s, &p, Model::Fasep).unwrap();
            let d = absorption_distribution(&ExactDistribution::uniform(&s), &g, &s).unwrap().by_config(&s);
            assert_eq!(d.len(), 2);
            assert_eq!(d[&ring("1010")], q(1, 2));
            assert_eq!(d[&ring("0101")], q(1, 2));
        }
    }

    #[test]
    fn absorption_matches_formula_and_ignores_p() {
        let s = enumerate_states(8, 3).unwrap();
        let a = |p: BigRational| {
            let g = build_generator(&s, &p, Model::Fasep).unwrap();
            absorption_distribution(&ExactDistribution::uniform(&s), &g, &s).unwrap().by_config(&s)
        };
        let low = a(q(1, 5));
        assert_eq!(low, a(q(9, 10)));
        assert_eq!(low, ring_final_measure(8, 3).unwrap());
    }

    #[test]
    fn high_density_is_not_absorbing() {
        let s = enumerate_states(6, 4).unwrap();
        let g = build_generator(&s, &q(1, 2), Model::Fasep).unwrap();
        assert!(matches!(
            absorption_distribution(&ExactDistribution::uniform(&s), &g, &s),
            Err(Error::NotAbsorbing(_))
        ));
    }

    #[test]
    fn stationary_laws() {
        let s = enumerate_states(6, 4).unwrap();
        let g = build_generator(&s, &q(1, 4), Model::Fasep).unwrap();
        let pi = stationary_distribution(&g).unwrap().by_config(&s);
        assert_eq!(pi.len(), 9);
        assert!(pi.iter().all(|(c, w)| c.is_no_adjacent_holes() && *w == q(1, 9)));

        let s = enumerate_states(5, 3).unwrap();
        let pi = stationary_distribution(&build_generator(&s, &q(2, 3), Model::Fasep).unwrap()).unwrap();
        assert_eq!(pi.weights.len(), 5);

        let s = enumerate_states(5, 2).unwrap();
        let pi = stationary_distribution(&build_generator(&s, &q(3, 7), Model::Asep).unwrap()).unwrap();
        assert!(pi.weights.len() == 10 && pi.weights.values().all(|w| *w == q(1, 10)));

        let s = enumerate_states(6, 2).unwrap();
        let err = stationary_distribution(&build_generator(&s, &q(1, 2), Model::Fasep).unwrap()).unwrap_err();
        match err {
            Error::Reducible(classes) => assert_eq!(classes.len(), ring_final_measure(6, 2).unwrap().len()),
            other => panic!("{other:?}"),
        }
        // half filling: the two alternating configurations
        let s = enumerate_states(6, 3).unwrap();
        match stationary_distribution(&build_generator(&s, &q(1, 2), Model::Fasep).unwrap()).unwrap_err() {
            Error::Reducible(classes) => {
                let bits: Vec<String> = classes.iter().map(|c| s.config(c[0]).bits()).collect();
                assert_eq!(classes.len(), 2);
                assert!(bits.contains(&"101010".to_string()) && bits.contains(&"010101".to_string()));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn exponential_marginals() {
        let s = enumerate_states(6, 4).unwrap();
        let g = build_generator(&s, &q(1, 2), Model::Fasep).unwrap();
        let start = ExactDistribution::point(s.index_of(&ring("111100")).unwrap()).to_dense_f64(s.len());
        assert_eq!(marginal_at_time(&start, &g, 0.0).unwrap(), start);
        let late = marginal_at_time(&start, &g, 400.0).unwrap();
        let pi = stationary_distribution(&g).unwrap().to_dense_f64(s.len());
        for (a, b) in late.iter().zip(&pi) {
            assert!((a - b).abs() < 1e-8);
        }
        let mid = marginal_at_time(&start, &g, 1.0).unwrap();
        assert!((mid.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        // no stationary weight on configurations containing 1100
        for (i, w) in pi.iter().enumerate() {
            let c = s.config(i);
            let l = c.len();
            let has = (0..l).any(|k| (0..4).map(|d| c.get((k + d) % l)).eq([1, 1, 0, 0]));
            if has {
                assert_eq!(*w, 0.0);
            }
        }
    }
}
