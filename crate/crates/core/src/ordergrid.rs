//! Solver-free analysis of subproblem orders over an epsilon grid.
//!
//! Given which grid cells are feasible, a traversal order determines how
//! many cells receive a warm-start candidate that is provably feasible and
//! how many infeasible cells can be skipped. The two goals conflict: an
//! ascending order warm-starts well, a descending one detects well.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use crate::ecm::{traverse_dims, OrderSignature};
use crate::error::{check_len, Error, Result};
use crate::pareto::nondominated_flags;

/// Feasibility of every grid cell, dimension 0 varying fastest in the flat
/// layout. The infeasible cells must be downward closed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeasibilityMask {
    dims: Vec<usize>,
    feasible: Vec<bool>,
}

impl FeasibilityMask {
    pub fn new(dims: Vec<usize>, feasible: Vec<bool>) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::Validation(format!("invalid mask dimensions {dims:?}")));
        }
        check_len(dims.iter().product(), feasible.len())?;
        let mask = Self { dims, feasible };
        // checking the immediate lower neighbours suffices by transitivity
        for idx in 0..mask.feasible.len() {
            if mask.feasible[idx] {
                continue;
            }
            let cell = mask.cell(idx);
            for d in 0..cell.len() {
                if cell[d] > 0 {
                    let mut lower = cell.clone();
                    lower[d] -= 1;
                    if mask.is_feasible(&lower) {
                        return Err(Error::Validation(format!(
                            "infeasible cell {cell:?} has feasible lower neighbour {lower:?}"
                        )));
                    }
                }
            }
        }
        Ok(mask)
    }

    pub fn uniform(dims: Vec<usize>, feasible: bool) -> Result<Self> {
        let n = dims.iter().product();
        Self::new(dims, vec![feasible; n])
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn flags(&self) -> &[bool] {
        &self.feasible
    }

    pub fn index(&self, cell: &[usize]) -> usize {
        let mut idx = 0;
        let mut stride = 1;
        for (&c, &d) in cell.iter().zip(&self.dims) {
            idx += c * stride;
            stride *= d;
        }
        idx
    }

    pub fn cell(&self, mut index: usize) -> Vec<usize> {
        self.dims
            .iter()
            .map(|&d| {
                let c = index % d;
                index /= d;
                c
            })
            .collect()
    }

    pub fn is_feasible(&self, cell: &[usize]) -> bool {
        self.feasible[self.index(cell)]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum WsMode {
    Weak,
    Strong,
}

impl fmt::Display for WsMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WsMode::Weak => "weak",
            WsMode::Strong => "strong",
        })
    }
}

impl FromStr for WsMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "weak" => Ok(WsMode::Weak),
            "strong" => Ok(WsMode::Strong),
            _ => Err(Error::Validation(format!("unknown warm-start mode {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct TradeoffCount {
    pub warm_starts: usize,
    pub detections: usize,
}

/// All `2^(p-1)` signatures, `+` before `-`, first dimension most
/// significant.
pub fn enumerate_signatures(p: usize) -> Result<Vec<OrderSignature>> {
    if p < 2 {
        return Err(Error::Validation(format!("need p >= 2, got {p}")));
    }
    let len = p - 1;
    (0..1usize << len)
        .map(|bits| OrderSignature::new((0..len).map(|d| bits >> (len - 1 - d) & 1 == 0).collect()))
        .collect()
}

fn leq(a: &[usize], b: &[usize]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y)
}

/// Simulates the traversal. A cell is detected when an earlier solved
/// infeasible cell is componentwise at least it; a feasible cell gets a
/// warm start when (weak) the immediately preceding cell was solved
/// feasible and is componentwise at most it, or (strong) any earlier solved
/// feasible cell is.
pub fn analyze_order(mask: &FeasibilityMask, sig: &OrderSignature, mode: WsMode) -> Result<TradeoffCount> {
    let order = traverse_dims(&mask.dims, sig)?;
    let mut count = TradeoffCount::default();
    let mut infeasible_max: Vec<&[usize]> = Vec::new();
    let mut feasible_min: Vec<&[usize]> = Vec::new();
    let mut previous: Option<&[usize]> = None;
    for cell in &order {
        if infeasible_max.iter().any(|s| leq(cell, s)) {
            count.detections += 1;
            previous = None;
            continue;
        }
        if mask.is_feasible(cell) {
            let warm = match mode {
                WsMode::Weak => previous.is_some_and(|p| leq(p, cell)),
                WsMode::Strong => feasible_min.iter().any(|s| leq(s, cell)),
            };
            count.warm_starts += usize::from(warm);
            if !feasible_min.iter().any(|s| leq(s, cell)) {
                feasible_min.retain(|s| !leq(cell, s));
                feasible_min.push(cell);
            }
            previous = Some(cell);
        } else {
            infeasible_max.retain(|s| !leq(s, cell));
            infeasible_max.push(cell);
            previous = None;
        }
    }
    Ok(count)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TradeoffRow {
    pub signature: OrderSignature,
    pub mode: WsMode,
    pub count: TradeoffCount,
    /// No other signature has at least as many warm starts and detections
    /// with one strictly more.
    pub nondominated: bool,
}

pub fn tradeoff_frontier(mask: &FeasibilityMask, mode: WsMode) -> Result<Vec<TradeoffRow>> {
    let sigs = enumerate_signatures(mask.dims.len() + 1)?;
    let counts = sigs
        .iter()
        .map(|s| analyze_order(mask, s, mode))
        .collect::<Result<Vec<_>>>()?;
    // maximize both counts: negate and minimize
    let negated: Vec<Vec<f64>> = counts
        .iter()
        .map(|c| vec![-(c.warm_starts as f64), -(c.detections as f64)])
        .collect();
    let flags = nondominated_flags(&negated);
    Ok(sigs
        .into_iter()
        .zip(counts)
        .zip(flags)
        .map(|((signature, count), nondominated)| TradeoffRow {
            signature,
            mode,
            count,
            nondominated,
        })
        .collect())
}

/// Columns `signature,ws_mode,warm_starts,detections,nondominated`.
pub fn write_tradeoff_csv<W: Write>(out: W, rows: &[TradeoffRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["signature", "ws_mode", "warm_starts", "detections", "nondominated"])?;
    for r in rows {
        w.write_record([
            r.signature.label(),
            r.mode.to_string(),
            r.count.warm_starts.to_string(),
            r.count.detections.to_string(),
            r.nondominated.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn labels(p: usize) -> Vec<String> {
        enumerate_signatures(p)
            .unwrap()
            .iter()
            .map(OrderSignature::label)
            .collect()
    }

    #[test]
    fn signature_enumeration() {
        assert_eq!(labels(3), vec!["o++", "o+-", "o-+", "o--"]);
        assert_eq!(labels(2), vec!["o+", "o-"]);
        let four = labels(4);
        assert_eq!(four.len(), 8);
        assert_eq!(four.iter().collect::<std::collections::HashSet<_>>().len(), 8);
        assert!(enumerate_signatures(1).is_err());
    }

    #[test]
    fn extreme_masks() {
        let feasible = FeasibilityMask::uniform(vec![4, 4], true).unwrap();
        let c = analyze_order(&feasible, &"o++".parse().unwrap(), WsMode::Strong).unwrap();
        assert_eq!(
            c,
            TradeoffCount {
                warm_starts: 15,
                detections: 0
            }
        );
        let infeasible = FeasibilityMask::uniform(vec![4, 4], false).unwrap();
        for mode in [WsMode::Weak, WsMode::Strong] {
            let c = analyze_order(&infeasible, &"o--".parse().unwrap(), mode).unwrap();
            assert_eq!(
                c,
                TradeoffCount {
                    warm_starts: 0,
                    detections: 15
                }
            );
        }
        // order reversal swaps the roles on the two extremes
        let up: OrderSignature = "o++".parse().unwrap();
        let a = analyze_order(&feasible, &up, WsMode::Strong).unwrap();
        let b = analyze_order(&infeasible, &up.reversed(), WsMode::Strong).unwrap();
        assert_eq!(a.warm_starts, b.detections);
    }

    #[test]
    fn frontier_on_extremes() {
        let feasible = FeasibilityMask::uniform(vec![3, 3, 3], true).unwrap();
        let rows = tradeoff_frontier(&feasible, WsMode::Strong).unwrap();
        let best = rows.iter().map(|r| r.count.warm_starts).max().unwrap();
        assert_eq!(rows[0].signature.label(), "o+++");
        assert_eq!(rows[0].count.warm_starts, best);
        assert!(rows[0].nondominated);

        let infeasible = FeasibilityMask::uniform(vec![3, 3], false).unwrap();
        let rows = tradeoff_frontier(&infeasible, WsMode::Weak).unwrap();
        let last = rows.last().unwrap();
        assert_eq!(last.signature.label(), "o--");
        assert_eq!(last.count.detections, 8);
    }

    #[test]
    fn mask_validation() {
        // infeasible (1,0) above feasible (0,0)
        assert!(FeasibilityMask::new(vec![2, 2], vec![true, false, true, true]).is_err());
        assert!(FeasibilityMask::new(vec![2, 2], vec![false, true, true, true]).is_ok());
        assert!(FeasibilityMask::new(vec![2, 2], vec![true; 3]).is_err());
        let m = FeasibilityMask::uniform(vec![3, 4], true).unwrap();
        for i in 0..12 {
            assert_eq!(m.index(&m.cell(i)), i);
        }
    }

    #[test]
    fn tradeoff_csv() {
        let rows = tradeoff_frontier(&FeasibilityMask::uniform(vec![2], true).unwrap(), WsMode::Weak).unwrap();
        let mut buf = Vec::new();
        write_tradeoff_csv(&mut buf, &rows).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "signature,ws_mode,warm_starts,detections,nondominated\no+,weak,1,0,true\no-,weak,0,0,false\n"
        );
    }

    /// Downward-closed mask from per-column thresholds of a monotone staircase.
    fn staircase(dims: Vec<usize>, seed: u64) -> FeasibilityMask {
        let n: usize = dims.iter().product();
        let base = FeasibilityMask::uniform(dims.clone(), true).unwrap();
        let mut rng = crate::rng::SplitMix64::new(seed);
        let generators: Vec<Vec<usize>> = (0..rng.int_in(0, 3))
            .map(|_| dims.iter().map(|&d| rng.int_in(0, d as i64 - 1) as usize).collect())
            .collect();
        let feasible = (0..n)
            .map(|i| {
                let c = base.cell(i);
                !generators.iter().any(|g| leq(&c, g))
            })
            .collect();
        FeasibilityMask::new(dims, feasible).unwrap()
    }

    /// Straightforward re-derivation over full history lists.
    fn reference(mask: &FeasibilityMask, sig: &OrderSignature, mode: WsMode) -> TradeoffCount {
        let order = traverse_dims(mask.dims(), sig).unwrap();
        let mut solved: Vec<(Vec<usize>, bool)> = Vec::new();
        let mut detected = vec![false; order.len()];
        let mut count = TradeoffCount::default();
        for (t, cell) in order.iter().enumerate() {
            if solved.iter().any(|(c, f)| !f && leq(cell, c)) {
                detected[t] = true;
                count.detections += 1;
                continue;
            }
            let feasible = mask.is_feasible(cell);
            if feasible {
                let warm = match mode {
                    WsMode::Weak => {
                        t > 0 && !detected[t - 1] && mask.is_feasible(&order[t - 1]) && leq(&order[t - 1], cell)
                    }
                    WsMode::Strong => solved.iter().any(|(c, f)| *f && leq(c, cell)),
                };
                count.warm_starts += usize::from(warm);
            }
            solved.push((cell.clone(), feasible));
        }
        count
    }

    proptest! {
        #[test]
        fn matches_reference_simulation(d0 in 1usize..6, d1 in 1usize..6, d2 in 1usize..4, seed in any::<u64>()) {
            let mask = staircase(vec![d0, d1, d2], seed);
            for sig in enumerate_signatures(4).unwrap() {
                let weak = analyze_order(&mask, &sig, WsMode::Weak).unwrap();
                let strong = analyze_order(&mask, &sig, WsMode::Strong).unwrap();
                prop_assert_eq!(weak, reference(&mask, &sig, WsMode::Weak));
                prop_assert_eq!(strong, reference(&mask, &sig, WsMode::Strong));
                prop_assert!(strong.warm_starts >= weak.warm_starts);
                prop_assert_eq!(strong.detections, weak.detections);
                let feasible = mask.flags().iter().filter(|f| **f).count();
                prop_assert!(strong.warm_starts <= feasible);
                prop_assert!(strong.detections <= mask.flags().len() - feasible);
            }
        }

        #[test]
        fn frontier_flags_rechecked(d0 in 1usize..6, d1 in 1usize..6, seed in any::<u64>()) {
            let mask = staircase(vec![d0, d1], seed);
            let rows = tradeoff_frontier(&mask, WsMode::Strong).unwrap();
            for r in &rows {
                let dominated = rows.iter().any(|q| {
                    q.count.warm_starts >= r.count.warm_starts
                        && q.count.detections >= r.count.detections
                        && q.count != r.count
                });
                prop_assert_eq!(r.nondominated, !dominated);
            }
        }
    }
}
