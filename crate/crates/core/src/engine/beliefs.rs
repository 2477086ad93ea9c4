use serde::{Deserialize, Serialize};

/// N x L matrix of beliefs in `[0, 1]`, row per agent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeliefMatrix {
    agents: usize,
    rumors: usize,
    values: Vec<f64>,
}

impl BeliefMatrix {
    pub fn zeros(agents: usize, rumors: usize) -> Self {
        Self { agents, rumors, values: vec![0.0; agents * rumors] }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let rumors = rows.first().map_or(0, Vec::len);
        let mut m = Self::zeros(rows.len(), rumors);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), rumors, "ragged belief rows");
            for (j, &v) in row.iter().enumerate() {
                m.set(i, j, v);
            }
        }
        m
    }

    pub fn agents(&self) -> usize {
        self.agents
    }

    pub fn rumors(&self) -> usize {
        self.rumors
    }

    pub fn get(&self, agent: usize, rumor: usize) -> f64 {
        self.values[agent * self.rumors + rumor]
    }

    pub fn set(&mut self, agent: usize, rumor: usize, value: f64) {
        assert!((0.0..=1.0).contains(&value), "belief {value} outside [0, 1]");
        self.values[agent * self.rumors + rumor] = value;
    }

    pub fn row(&self, agent: usize) -> &[f64] {
        &self.values[agent * self.rumors..(agent + 1) * self.rumors]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.agents).map(|i| self.row(i).to_vec()).collect()
    }

    /// Overwrites an agent's row: true becomes 1.0, false 0.0.
    pub fn set_row_from_checks(&mut self, agent: usize, checks: &[bool]) {
        assert_eq!(checks.len(), self.rumors);
        for (j, &c) in checks.iter().enumerate() {
            self.set(agent, j, if c { 1.0 } else { 0.0 });
        }
    }

    pub fn believers(&self, rumor: usize, threshold: f64) -> usize {
        (0..self.agents).filter(|&i| self.get(i, rumor) >= threshold).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_and_counts() {
        let mut b = BeliefMatrix::zeros(3, 2);
        b.set_row_from_checks(1, &[true, false]);
        b.set(2, 0, 0.4);
        assert_eq!(b.row(1), &[1.0, 0.0]);
        assert_eq!(b.believers(0, 0.5), 1);
        assert_eq!(b.believers(0, 0.3), 2);
        assert_eq!(BeliefMatrix::from_rows(&b.rows()), b);
    }

    #[test]
    #[should_panic(expected = "outside [0, 1]")]
    fn out_of_range_belief_panics() {
        BeliefMatrix::zeros(1, 1).set(0, 0, 1.5);
    }
}
