#![allow(dead_code)]

use heurstop::{Benchmark, DomainStatus, Grid, GridFunction, InnerProductSpec, NonlinearProblem, Result, Space};

/// `F(x) = d ⊙ x` on a periodic L² grid.
pub struct Diagonal {
    space: InnerProductSpec,
    d: Vec<f64>,
    bench: Benchmark,
}

impl Diagonal {
    pub fn new(d: Vec<f64>) -> Self {
        let grid = Grid::periodic(d.len()).unwrap();
        let x_dagger = GridFunction::constant(grid, Space::L2, 1.0).unwrap();
        Self {
            space: InnerProductSpec::l2(grid),
            d,
            bench: Benchmark {
                x0: GridFunction::zeros(grid, Space::L2),
                x_dagger,
                default_n: 0,
                tau: 1.1,
                delta_rel_list: vec![0.01],
                kmax: 100,
            },
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::new(vec![1.0; n])
    }

    fn scale(&self, x: &GridFunction) -> Result<GridFunction> {
        let v = x.values().iter().zip(&self.d).map(|(a, b)| a * b).collect();
        GridFunction::new(x.grid(), Space::L2, v)
    }
}

impl NonlinearProblem for Diagonal {
    fn name(&self) -> &str {
        "diagonal"
    }
    fn domain(&self) -> &InnerProductSpec {
        &self.space
    }
    fn range(&self) -> &InnerProductSpec {
        &self.space
    }
    fn apply(&self, x: &GridFunction) -> Result<GridFunction> {
        self.scale(x)
    }
    fn derivative(&self, _x: &GridFunction, h: &GridFunction) -> Result<GridFunction> {
        self.scale(h)
    }
    fn adjoint(&self, _x: &GridFunction, r: &GridFunction) -> Result<GridFunction> {
        self.scale(r)
    }
    fn domain_check(&self, _x: &GridFunction) -> DomainStatus {
        DomainStatus::Inside
    }
    fn benchmark(&self) -> &Benchmark {
        &self.bench
    }
}

pub fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}
