//! Sum-product variable elimination.
//!
//! Evidence enters as indicator masks on each variable's own CPT factor. Every
//! variable other than the query is then summed out, picking at each step the
//! variable with the fewest neighbours in the current interaction graph (ties
//! go to the smaller id).

use std::collections::BTreeSet;

use super::{clamp_probability, ratio, CompiledNetwork, InferenceError, StateMask};

#[derive(Debug, Clone, PartialEq)]
pub struct Factor {
    /// Variable indices, ascending.
    pub vars: Vec<usize>,
    pub cards: Vec<usize>,
    /// Row-major over `vars`, last variable fastest.
    pub values: Vec<f64>,
}

impl Factor {
    pub fn scalar(value: f64) -> Self {
        Factor {
            vars: Vec::new(),
            cards: Vec::new(),
            values: vec![value],
        }
    }

    fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.vars.len()];
        for i in (0..self.vars.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * self.cards[i + 1];
        }
        strides
    }

    /// Stride of each variable of `scope` inside `self` (0 if absent).
    fn strides_in(&self, scope: &[usize]) -> Vec<usize> {
        let own = self.strides();
        scope
            .iter()
            .map(|v| self.vars.iter().position(|x| x == v).map_or(0, |i| own[i]))
            .collect()
    }

    pub fn product(&self, other: &Factor) -> Factor {
        let mut scope: Vec<(usize, usize)> = self
            .vars
            .iter()
            .copied()
            .zip(self.cards.iter().copied())
            .chain(other.vars.iter().copied().zip(other.cards.iter().copied()))
            .collect();
        scope.sort_unstable();
        scope.dedup();
        let vars: Vec<usize> = scope.iter().map(|&(v, _)| v).collect();
        let cards: Vec<usize> = scope.iter().map(|&(_, c)| c).collect();
        let sa = self.strides_in(&vars);
        let sb = other.strides_in(&vars);
        let size: usize = cards.iter().product();
        let mut values = Vec::with_capacity(size);
        let mut digits = vec![0usize; vars.len()];
        let (mut ia, mut ib) = (0usize, 0usize);
        for _ in 0..size {
            values.push(self.values[ia] * other.values[ib]);
            for pos in (0..digits.len()).rev() {
                digits[pos] += 1;
                ia += sa[pos];
                ib += sb[pos];
                if digits[pos] < cards[pos] {
                    break;
                }
                ia -= sa[pos] * cards[pos];
                ib -= sb[pos] * cards[pos];
                digits[pos] = 0;
            }
        }
        Factor { vars, cards, values }
    }

    pub fn sum_out(&self, var: usize) -> Factor {
        let Some(at) = self.vars.iter().position(|&v| v == var) else {
            return self.clone();
        };
        let mut vars = self.vars.clone();
        let mut cards = self.cards.clone();
        vars.remove(at);
        cards.remove(at);
        let target = Factor {
            vars,
            cards,
            values: Vec::new(),
        };
        let st = target.strides_in(&self.vars);
        let mut values = vec![0.0; target.cards.iter().product()];
        let mut digits = vec![0usize; self.vars.len()];
        let mut it = 0usize;
        for &value in &self.values {
            values[it] += value;
            for pos in (0..digits.len()).rev() {
                digits[pos] += 1;
                it += st[pos];
                if digits[pos] < self.cards[pos] {
                    break;
                }
                it -= st[pos] * self.cards[pos];
                digits[pos] = 0;
            }
        }
        Factor { values, ..target }
    }
}

/// The CPT of variable `v` as a factor over `{v} ∪ parents(v)`, with the
/// entries outside `allowed` zeroed.
fn cpt_factor(net: &CompiledNetwork<'_>, v: usize, allowed: Option<&Vec<bool>>) -> Factor {
    let var = &net.variables[v];
    let mut vars: Vec<usize> = var.parents.iter().copied().chain([v]).collect();
    vars.sort_unstable();
    let cards: Vec<usize> = vars.iter().map(|&x| net.cards[x]).collect();
    let size: usize = cards.iter().product();
    let mut world = vec![0usize; net.cards.len()];
    let mut digits = vec![0usize; vars.len()];
    let mut values = Vec::with_capacity(size);
    for _ in 0..size {
        for (&x, &d) in vars.iter().zip(&digits) {
            world[x] = d;
        }
        let s = world[v];
        let keep = allowed.is_none_or(|m| m[s]);
        values.push(if keep {
            var.entry(&world, &net.cards, s)
        } else {
            0.0
        });
        for pos in (0..digits.len()).rev() {
            digits[pos] += 1;
            if digits[pos] < cards[pos] {
                break;
            }
            digits[pos] = 0;
        }
    }
    Factor { vars, cards, values }
}

/// Unnormalized distribution of `query` jointly with the evidence:
/// entry `s` is `P(query = s, evidence)`.
pub fn joint_with_evidence(net: &CompiledNetwork<'_>, query: usize, evidence: &StateMask) -> Vec<f64> {
    let mut factors: Vec<Factor> = (0..net.variables.len())
        .map(|v| cpt_factor(net, v, evidence[v].as_ref()))
        .collect();
    let mut remaining: BTreeSet<(&str, usize)> = net
        .variables
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != query)
        .map(|(i, v)| (v.id.as_str(), i))
        .collect();

    while !remaining.is_empty() {
        let &(id, var) = remaining
            .iter()
            .min_by_key(|&&(id, v)| (degree(&factors, v), id))
            .expect("nonempty");
        remaining.remove(&(id, var));
        let (touching, rest): (Vec<Factor>, Vec<Factor>) =
            factors.into_iter().partition(|f| f.vars.contains(&var));
        factors = rest;
        if let Some(product) = touching.into_iter().reduce(|a, b| a.product(&b)) {
            factors.push(product.sum_out(var));
        }
    }

    let result = factors
        .into_iter()
        .fold(Factor::scalar(1.0), |acc, f| acc.product(&f));
    debug_assert_eq!(result.vars, vec![query]);
    result.values
}

fn degree(factors: &[Factor], var: usize) -> usize {
    let mut neighbours = BTreeSet::new();
    for f in factors.iter().filter(|f| f.vars.contains(&var)) {
        neighbours.extend(f.vars.iter().copied().filter(|&x| x != var));
    }
    neighbours.len()
}

/// `P(query ∈ states | evidence)`.
pub fn conditional(
    net: &CompiledNetwork<'_>,
    query: usize,
    states: &[usize],
    evidence: &StateMask,
) -> Result<f64, InferenceError> {
    let joint = joint_with_evidence(net, query, evidence);
    let total: f64 = joint.iter().sum();
    let hit: f64 = states.iter().map(|&s| joint[s]).sum();
    ratio(clamp_probability(hit)?, total)
}

/// Normalized posterior over the states of `query`.
pub fn posterior(
    net: &CompiledNetwork<'_>,
    query: usize,
    evidence: &StateMask,
) -> Result<Vec<f64>, InferenceError> {
    let joint = joint_with_evidence(net, query, evidence);
    let total: f64 = joint.iter().sum();
    if total <= 0.0 {
        return Err(InferenceError::ZeroProbabilityEvidence);
    }
    joint.iter().map(|&p| clamp_probability(p / total)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_and_sum_out() {
        // f(a) = [0.3, 0.7]; g(a, b) = [[0.9, 0.1], [0.2, 0.8]]
        let f = Factor {
            vars: vec![0],
            cards: vec![2],
            values: vec![0.3, 0.7],
        };
        let g = Factor {
            vars: vec![0, 1],
            cards: vec![2, 2],
            values: vec![0.9, 0.1, 0.2, 0.8],
        };
        let fg = f.product(&g);
        assert_eq!(fg.vars, vec![0, 1]);
        let expected = [0.27, 0.03, 0.14, 0.56];
        for (x, y) in fg.values.iter().zip(expected) {
            assert!((x - y).abs() < 1e-15);
        }
        let b = fg.sum_out(0);
        assert_eq!(b.vars, vec![1]);
        assert!((b.values[0] - 0.41).abs() < 1e-15);
        assert!((b.values[1] - 0.59).abs() < 1e-15);
        let a = fg.sum_out(1);
        assert!((a.values[0] - 0.3).abs() < 1e-15);
    }

    #[test]
    fn product_with_disjoint_scopes_is_outer_product() {
        let x = Factor {
            vars: vec![2],
            cards: vec![3],
            values: vec![1.0, 2.0, 3.0],
        };
        let y = Factor {
            vars: vec![0],
            cards: vec![2],
            values: vec![10.0, 20.0],
        };
        let xy = x.product(&y);
        assert_eq!(xy.vars, vec![0, 2]);
        assert_eq!(xy.values, vec![10.0, 20.0, 30.0, 20.0, 40.0, 60.0]);
    }
}
