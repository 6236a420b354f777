use crate::error::{Error, Result};
use crate::field::Label;

/// Budgeted access to the sensors' current labels.
///
/// Every query costs one unit of budget, including repeats of an index that
/// was already asked.
#[derive(Debug, Clone)]
pub struct LabelOracle<'a> {
    labels: &'a [Label],
    budget: usize,
    log: Vec<(usize, Label)>,
}

impl<'a> LabelOracle<'a> {
    pub fn new(labels: &'a [Label], budget: usize) -> LabelOracle<'a> {
        LabelOracle {
            labels,
            budget,
            log: Vec::new(),
        }
    }

    pub fn query(&mut self, i: usize) -> Result<Label> {
        if self.budget == 0 {
            return Err(Error::BudgetExceeded);
        }
        let label = *self.labels.get(i).ok_or(Error::IndexOutOfRange {
            index: i,
            len: self.labels.len(),
        })?;
        self.budget -= 1;
        self.log.push((i, label));
        Ok(label)
    }

    pub fn remaining(&self) -> usize {
        self.budget
    }

    pub fn queries_made(&self) -> usize {
        self.log.len()
    }

    pub fn log(&self) -> &[(usize, Label)] {
        &self.log
    }

    /// Number of sensors the oracle answers for.
    pub fn population(&self) -> usize {
        self.labels.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn budget_accounting() {
        let labels = [Label::Positive, Label::Negative];
        let mut o = LabelOracle::new(&labels, 1);
        assert_eq!(o.query(1).unwrap(), Label::Negative);
        assert_eq!(o.remaining(), 0);
        assert!(matches!(o.query(0), Err(Error::BudgetExceeded)));
        assert_eq!(o.log(), &[(1, Label::Negative)]);
    }

    #[test]
    fn repeated_queries_cost_budget() {
        let labels = [Label::Positive];
        let mut o = LabelOracle::new(&labels, 3);
        o.query(0).unwrap();
        o.query(0).unwrap();
        assert_eq!(o.remaining(), 1);
        assert_eq!(o.queries_made(), 2);
    }

    #[test]
    fn out_of_range_does_not_spend() {
        let labels = [Label::Positive];
        let mut o = LabelOracle::new(&labels, 3);
        assert!(o.query(5).is_err());
        assert_eq!(o.remaining(), 3);
    }
}
