use serde::Serialize;

pub const SCHEMA: u32 = 1;

/// One solver run.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct RunReport {
    pub schema: u32,
    pub solver: String,
    pub n: usize,
    pub d: usize,
    /// Point dimension for kernel solvers.
    pub p: Option<usize>,
    pub p_norm: Option<f64>,
    pub kernel: Option<String>,
    pub rank: Option<usize>,
    pub eps: f64,
    pub delta: Option<f64>,
    pub seed: u64,
    pub residual: Option<f64>,
    pub fit: Option<f64>,
    pub oracle: Option<f64>,
    pub ratio: Option<f64>,
    pub wall_time_ms: f64,
    pub matvec_count: Option<u64>,
    pub kernel_eval_count: Option<u64>,
    pub b_read_count: Option<u64>,
    pub flags: Vec<String>,
    pub x: Option<Vec<f64>>,
    pub sampled: Option<Vec<usize>>,
}

impl RunReport {
    pub fn new(solver: &str, n: usize, d: usize, eps: f64, seed: u64) -> Self {
        Self {
            schema: SCHEMA,
            solver: solver.into(),
            n,
            d,
            p: None,
            p_norm: None,
            kernel: None,
            rank: None,
            eps,
            delta: None,
            seed,
            residual: None,
            fit: None,
            oracle: None,
            ratio: None,
            wall_time_ms: 0.0,
            matvec_count: None,
            kernel_eval_count: None,
            b_read_count: None,
            flags: Vec::new(),
            x: None,
            sampled: None,
        }
    }

    pub fn flag(&mut self, set: bool, name: &str) {
        if set {
            self.flags.push(name.into());
        }
    }

    /// Records the oracle value and the ratio of `value` to it. Both sides
    /// are floored at `1e-10 * scale` so a consistent system reports 1
    /// instead of a ratio of rounding errors.
    pub fn set_oracle(&mut self, value: f64, oracle: f64, scale: f64) {
        let floor = 1e-10 * scale;
        self.oracle = Some(oracle);
        self.ratio = Some(value.max(floor) / oracle.max(floor));
    }

    pub fn print_text(&self) {
        println!("solver          {}", self.solver);
        println!("n, d            {}, {}", self.n, self.d);
        if let Some(p) = self.p {
            println!("point dim       {p}");
        }
        if let Some(p) = self.p_norm {
            println!("p-norm          {p}");
        }
        if let Some(k) = &self.kernel {
            println!("kernel          {k}");
        }
        if let Some(k) = self.rank {
            println!("rank            {k}");
        }
        println!("eps             {}", self.eps);
        if let Some(delta) = self.delta {
            println!("delta           {delta}");
        }
        println!("seed            {}", self.seed);
        if let Some(r) = self.residual {
            println!("residual        {r:.6e}");
        }
        if let Some(f) = self.fit {
            println!("fit             {f:.6e}");
        }
        if let Some(o) = self.oracle {
            println!("oracle          {o:.6e}");
        }
        if let Some(r) = self.ratio {
            println!("ratio           {r:.6}");
        }
        println!("wall time (ms)  {:.3}", self.wall_time_ms);
        if let Some(m) = self.matvec_count {
            println!("matvecs         {m}");
        }
        if let Some(k) = self.kernel_eval_count {
            println!("kernel evals    {k}");
        }
        if let Some(b) = self.b_read_count {
            println!("target reads    {b}");
        }
        if !self.flags.is_empty() {
            println!("flags           {}", self.flags.join(", "));
        }
        if let Some(x) = &self.x {
            let shown: Vec<String> = x.iter().map(|v| format!("{v:.10e}")).collect();
            println!("x               [{}]", shown.join(", "));
        }
    }
}

/// Rows of a `bench` sweep.
#[derive(Debug, Clone, Serialize)]
pub struct BenchReport {
    pub schema: u32,
    pub solver: String,
    pub runs: Vec<BenchRow>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchRow {
    pub n: usize,
    pub d: usize,
    pub wall_time_ms: f64,
    pub matvec_count: Option<u64>,
    /// `matvec_budget * ceil(log2 n)^2` from the configuration.
    pub matvec_bound: Option<u64>,
    pub kernel_eval_count: Option<u64>,
    pub b_read_count: Option<u64>,
    pub flags: Vec<String>,
}

impl BenchReport {
    pub fn print_text(&self) {
        println!("solver {}", self.solver);
        println!("{:>10} {:>5} {:>14} {:>14} {:>12} {:>12}", "n", "d", "wall_time_ms", "matvec_count", "matvec_bound", "other");
        let show = |v: Option<u64>| v.map_or("-".to_string(), |x| x.to_string());
        for r in &self.runs {
            let other = match (r.kernel_eval_count, r.b_read_count) {
                (Some(k), _) => format!("kernel={k}"),
                (None, Some(b)) => format!("reads={b}"),
                _ => "-".into(),
            };
            println!(
                "{:>10} {:>5} {:>14.3} {:>14} {:>12} {:>12}",
                r.n,
                r.d,
                r.wall_time_ms,
                show(r.matvec_count),
                show(r.matvec_bound),
                other
            );
        }
    }
}
