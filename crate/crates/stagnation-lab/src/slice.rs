use global_fit::HeatAnsatz;
use stagtrack::PlanarField;

/// Time slice of a heat ansatz as a planar field.
pub struct AnsatzSlice<'a> {
    pub ansatz: &'a HeatAnsatz,
    pub t: f64,
}

const ORDERS: [[usize; 3]; 6] = [[0, 0, 0], [1, 0, 0], [0, 1, 0], [2, 0, 0], [1, 1, 0], [0, 2, 0]];

impl PlanarField for AnsatzSlice<'_> {
    fn time(&self) -> f64 {
        self.t
    }

    fn jet(&self, x: f64, y: f64) -> [f64; 6] {
        let v = self.ansatz.partials(&ORDERS, [x, y, self.t]);
        std::array::from_fn(|i| v[i])
    }
}
