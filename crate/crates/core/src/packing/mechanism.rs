use super::{solve_packing_integral, solve_packing_lp, PackingAllocation, PackingInstance};
use crate::error::Result;
use crate::mechanism::{Domain, Lottery, Mechanism, OutcomeSpace};
use crate::rational::Rational;

/// Pay-your-bid mechanism that outputs the fractional LP optimum.
#[derive(Clone, Debug)]
pub struct LpMechanism {
    pub instance: PackingInstance,
}

impl Mechanism for LpMechanism {
    type Bid = Vec<Rational>;
    type Relaxed = PackingAllocation;
    type Outcome = PackingAllocation;

    fn domain(&self) -> Domain {
        Domain::Packing
    }

    fn num_players(&self) -> usize {
        self.instance.n
    }

    fn space(&self) -> OutcomeSpace {
        OutcomeSpace::Relaxed
    }

    fn is_exact_maximizer(&self) -> bool {
        true
    }

    fn relax(&self, bids: &[Vec<Rational>]) -> Result<PackingAllocation> {
        Ok(solve_packing_lp(&self.instance, bids)?.allocation)
    }

    fn round(&self, relaxed: &PackingAllocation, _seed: u64) -> Result<PackingAllocation> {
        Ok(relaxed.clone())
    }

    fn value(&self, player: usize, valuation: &Vec<Rational>, outcome: &PackingAllocation) -> Rational {
        outcome.value(player, valuation)
    }

    fn optimal_welfare(&self, values: &[Vec<Rational>]) -> Result<Rational> {
        Ok(solve_packing_lp(&self.instance, values)?.welfare)
    }
}

/// Pay-your-bid mechanism that maximizes declared welfare over integral
/// allocations by exhaustive search.
#[derive(Clone, Debug)]
pub struct IntegralMechanism {
    pub instance: PackingInstance,
}

impl Mechanism for IntegralMechanism {
    type Bid = Vec<Rational>;
    type Relaxed = PackingAllocation;
    type Outcome = PackingAllocation;

    fn domain(&self) -> Domain {
        Domain::Packing
    }

    fn num_players(&self) -> usize {
        self.instance.n
    }

    fn space(&self) -> OutcomeSpace {
        OutcomeSpace::Original
    }

    fn is_exact_maximizer(&self) -> bool {
        true
    }

    fn relax(&self, bids: &[Vec<Rational>]) -> Result<PackingAllocation> {
        Ok(solve_packing_integral(&self.instance, bids)?.allocation)
    }

    fn round(&self, relaxed: &PackingAllocation, _seed: u64) -> Result<PackingAllocation> {
        Ok(relaxed.clone())
    }

    fn value(&self, player: usize, valuation: &Vec<Rational>, outcome: &PackingAllocation) -> Rational {
        outcome.value(player, valuation)
    }

    fn optimal_welfare(&self, values: &[Vec<Rational>]) -> Result<Rational> {
        Ok(solve_packing_integral(&self.instance, values)?.welfare)
    }
}

/// Oblivious rounding of a fractional packing solution: it may read the
/// instance and the fractional point but never the bids.
pub trait PackingRounding {
    /// Per-player approximation guarantee.
    fn alpha(&self) -> Rational;
    fn round(&self, instance: &PackingInstance, x: &PackingAllocation, seed: u64) -> Result<PackingAllocation>;
    fn lottery(&self, _instance: &PackingInstance, _x: &PackingAllocation, _limit: usize) -> Result<Option<Lottery<PackingAllocation>>> {
        Ok(None)
    }
}

/// LP relaxation followed by a pluggable oblivious rounding. Welfare is
/// measured against the integral optimum.
#[derive(Clone, Debug)]
pub struct RoundedLpMechanism<R> {
    pub instance: PackingInstance,
    pub rounding: R,
}

impl<R: PackingRounding> Mechanism for RoundedLpMechanism<R> {
    type Bid = Vec<Rational>;
    type Relaxed = PackingAllocation;
    type Outcome = PackingAllocation;

    fn domain(&self) -> Domain {
        Domain::Packing
    }

    fn num_players(&self) -> usize {
        self.instance.n
    }

    fn space(&self) -> OutcomeSpace {
        OutcomeSpace::Original
    }

    fn is_exact_maximizer(&self) -> bool {
        false
    }

    fn is_randomized(&self) -> bool {
        true
    }

    fn relax(&self, bids: &[Vec<Rational>]) -> Result<PackingAllocation> {
        Ok(solve_packing_lp(&self.instance, bids)?.allocation)
    }

    fn round(&self, relaxed: &PackingAllocation, seed: u64) -> Result<PackingAllocation> {
        self.rounding.round(&self.instance, relaxed, seed)
    }

    fn lottery(&self, relaxed: &PackingAllocation, limit: usize) -> Result<Option<Lottery<PackingAllocation>>> {
        self.rounding.lottery(&self.instance, relaxed, limit)
    }

    fn value(&self, player: usize, valuation: &Vec<Rational>, outcome: &PackingAllocation) -> Rational {
        outcome.value(player, valuation)
    }

    fn optimal_welfare(&self, values: &[Vec<Rational>]) -> Result<Rational> {
        Ok(solve_packing_integral(&self.instance, values)?.welfare)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mechanism::{check_smoothness, deviation_grid, run_pay_your_bid, verify_pure_nash, CheckOptions, SmoothnessParams};
    use crate::packing::gen_multiunit_counterexample;
    use crate::rational::{int, ratio};

    fn single_item(n: usize) -> PackingInstance {
        PackingInstance::new(vec![vec![int(1)]; n], vec![vec![vec![int(1)]; n]], vec![int(1)]).unwrap()
    }

    #[test]
    fn first_price_single_item() {
        let f = IntegralMechanism { instance: single_item(2) };
        let run = run_pay_your_bid(&f, &[vec![int(3)], vec![int(1)]], &[vec![int(5)], vec![int(1)]], 0).unwrap();
        assert_eq!(run.payments, vec![int(3), int(0)]);
        assert_eq!(run.utilities, vec![int(2), int(0)]);
        assert_eq!(run.welfare, int(5));

        let run = run_pay_your_bid(&f, &[vec![int(0)], vec![int(0)]], &[vec![int(1)], vec![int(1)]], 0).unwrap();
        assert_eq!(run.outcome.x[0][0], int(1));
        assert_eq!(run.payments[0], int(0));
        assert!(run_pay_your_bid(&f, &[vec![int(0)]], &[vec![int(1)], vec![int(1)]], 0).is_err());
    }

    #[test]
    fn truthful_first_price_not_nash() {
        let f = IntegralMechanism { instance: single_item(2) };
        let values = vec![vec![int(1)], vec![ratio(1, 2)]];
        let grid = deviation_grid(&values, 20, &[]);
        let r = verify_pure_nash(&f, &values, &values, &grid, &CheckOptions::default()).unwrap();
        assert!(!r.is_nash);
        assert!(r.best[0].is_some());
    }

    #[test]
    fn lone_zero_bidder_is_nash() {
        let f = IntegralMechanism { instance: single_item(1) };
        let values = vec![vec![int(1)]];
        let grid = deviation_grid(&values, 20, &[]);
        let r = verify_pure_nash(&f, &[vec![int(0)]], &values, &grid, &CheckOptions::default()).unwrap();
        assert!(r.is_nash);
        assert_eq!(r.max_regret, int(0));
        let empty = verify_pure_nash(&f, &values, &values, &[], &CheckOptions::default()).unwrap();
        assert!(empty.is_nash);
    }

    #[test]
    fn counterexample_is_nash_and_violates_smoothness() {
        let ce = gen_multiunit_counterexample(4).unwrap();
        let f = IntegralMechanism { instance: ce.instance.clone() };
        let values = ce.instance.values.clone();
        let grid = deviation_grid(&values, 4, &[int(0), int(1), int(2)]);
        let r = verify_pure_nash(&f, &ce.bids, &values, &grid, &CheckOptions::default()).unwrap();
        assert!(r.is_nash);

        let ce = gen_multiunit_counterexample(12).unwrap();
        let f = IntegralMechanism { instance: ce.instance.clone() };
        let p = SmoothnessParams::half_value(ratio(1, 2), int(2)).unwrap();
        let cert = check_smoothness(&f, &[ce.instance.values.clone()], &[ce.bids.clone()], &p, &CheckOptions::default()).unwrap();
        assert!(!cert.holds);
        assert_eq!((cert.lhs, cert.rhs, cert.slack), (int(0), int(2), int(-2)));
    }

    #[test]
    fn lp_payments_match_allocation() {
        let ce = gen_multiunit_counterexample(3).unwrap();
        let f = LpMechanism { instance: ce.instance.clone() };
        let bids = ce.instance.values.clone();
        let run = run_pay_your_bid(&f, &bids, &bids, 0).unwrap();
        for i in 0..f.num_players() {
            let direct: Rational = (0..ce.instance.k).map(|k| &bids[i][k] * &run.outcome.x[i][k]).sum();
            assert_eq!(run.payments[i], direct);
        }
    }
}
