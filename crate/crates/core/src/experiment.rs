//! Table-style experiments: rows are mesh levels (or problem sizes), columns
//! are cycle variants, cells are iteration counts of the stationary solve.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::amli::{stationary_solve, AmliKind, CycleParams, Method, SolveReport, StopCriterion, TolKind, Truncation};
use crate::cycles::LinearCycleKind;
use crate::error::{Error, Result};
use crate::hierarchy::{
    build_geometric, build_ua_amg, GeometricProblem, Hierarchy, DEFAULT_MAX_LEVELS, DEFAULT_MIN_COARSE, DEFAULT_THETA,
};
use crate::linalg::vector::dot;
use crate::par;
use crate::problems::{assemble_poisson, DEFAULT_LOW_COEFFICIENT};
use crate::rng::{normal_vector, DEFAULT_SEED};
use crate::smoothers::{SmootherKind, SmootherSpec};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProblemKind {
    Poisson,
    /// Jump coefficient with the given low value, zero load.
    Jump(f64),
    UaPoisson,
}

impl ProblemKind {
    fn row_label(&self) -> &'static str {
        match self {
            ProblemKind::UaPoisson => "size",
            _ => "k",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Markdown,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "markdown" | "md" => Ok(OutputFormat::Markdown),
            other => Err(Error::InvalidParameter(format!("unknown output format '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub problem: ProblemKind,
    /// Mesh levels, or problem sizes for [`ProblemKind::UaPoisson`].
    pub rows: Vec<usize>,
    pub methods: Vec<Method>,
    pub smoother: SmootherSpec,
    pub tol: f64,
    pub tol_kind: TolKind,
    pub max_iter: usize,
    pub seed: u64,
    pub format: OutputFormat,
    pub theta: f64,
}

impl ExperimentConfig {
    /// The five columns of the classic table layout for `problem`.
    pub fn table_layout(problem: ProblemKind, rows: Vec<usize>) -> Self {
        let mut map = BTreeMap::new();
        let name = match problem {
            ProblemKind::Poisson => "poisson",
            ProblemKind::Jump(low) => {
                map.insert("low".into(), low.to_string());
                "jump"
            }
            ProblemKind::UaPoisson => "ua_poisson",
        };
        map.insert("problem".into(), name.into());
        let list = rows.iter().map(|r| r.to_string()).collect::<Vec<_>>().join(",");
        let key = if problem == ProblemKind::UaPoisson {
            "sizes"
        } else {
            "levels"
        };
        map.insert(key.into(), list);
        Self::from_map(&map).expect("default layout is valid")
    }

    /// Build a config from `key = value` pairs. Unknown keys are rejected.
    ///
    /// Keys: `problem`, `levels`, `sizes`, `cycle`, `npcg`, `truncate`,
    /// `smoother`, `tol`, `tol_kind`, `max_iter`, `seed`, `format`, `low`,
    /// `theta`.
    pub fn from_map(map: &BTreeMap<String, String>) -> Result<Self> {
        const KEYS: [&str; 14] = [
            "problem", "levels", "sizes", "cycle", "npcg", "truncate", "smoother", "tol", "tol_kind", "max_iter",
            "seed", "format", "low", "theta",
        ];
        if let Some(k) = map.keys().find(|k| !KEYS.contains(&k.as_str())) {
            return Err(Error::InvalidParameter(format!("unknown config key '{k}'")));
        }
        let get = |k: &str| map.get(k).map(|s| s.trim());

        let low = get("low")
            .map(|s| parse_num::<f64>("low", s))
            .transpose()?
            .unwrap_or(DEFAULT_LOW_COEFFICIENT);
        let problem = match get("problem").unwrap_or("poisson") {
            "poisson" => ProblemKind::Poisson,
            "jump" => ProblemKind::Jump(low),
            "ua_poisson" | "ua-poisson" => ProblemKind::UaPoisson,
            other => return Err(Error::InvalidParameter(format!("unknown problem '{other}'"))),
        };

        let rows = match (problem, get("levels"), get("sizes")) {
            (ProblemKind::UaPoisson, _, Some(s)) => parse_list("sizes", s)?,
            (ProblemKind::UaPoisson, Some(s), None) => parse_list("levels", s)?
                .into_iter()
                .map(|k| ((1usize << k) - 1).pow(2))
                .collect(),
            (ProblemKind::UaPoisson, None, None) => vec![3969, 16129, 65025],
            (_, Some(s), None) => parse_list("levels", s)?,
            (_, None, None) => (5..=9).collect(),
            (_, _, Some(_)) => {
                return Err(Error::InvalidParameter("sizes only apply to ua_poisson".into()));
            }
        };
        if rows.is_empty() {
            return Err(Error::InvalidParameter("empty level or size list".into()));
        }

        let npcg = parse_list("npcg", get("npcg").unwrap_or("1,2"))?;
        let truncation: Truncation = get("truncate").unwrap_or("full").parse()?;
        let mut linear = Vec::new();
        let mut amli = Vec::new();
        for c in get("cycle")
            .unwrap_or("v,amli")
            .split(',')
            .map(str::trim)
            .filter(|c| !c.is_empty())
        {
            match c {
                "v" => linear.push(Method::Linear(LinearCycleKind::V)),
                "backslash" | "ns" => linear.push(Method::Linear(LinearCycleKind::Backslash)),
                "amli" | "amli-ns" => {
                    let kind = if c == "amli" {
                        AmliKind::Symmetric
                    } else {
                        AmliKind::Nonsymmetric
                    };
                    let params = |n: usize| CycleParams {
                        n_inner: n,
                        truncation,
                        kind,
                    };
                    for &n in &npcg {
                        params(n).validate()?;
                        amli.push(Method::Hat(params(n)));
                    }
                    amli.extend(npcg.iter().map(|&n| Method::Tilde(params(n))));
                }
                other => return Err(Error::InvalidParameter(format!("unknown cycle '{other}'"))),
            }
        }
        let methods: Vec<Method> = linear.into_iter().chain(amli).collect();
        if methods.is_empty() {
            return Err(Error::InvalidParameter("no cycle selected".into()));
        }

        let smoother = match get("smoother") {
            None => SmootherSpec::default(),
            Some(s) => SmootherSpec::of_kind(s.parse::<SmootherKind>()?),
        };
        let tol = get("tol")
            .map(|s| parse_num::<f64>("tol", s))
            .transpose()?
            .unwrap_or(1e-6);
        if !(tol > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "tolerance must be positive, got {tol}"
            )));
        }
        let tol_kind = match (problem, get("tol_kind")) {
            (ProblemKind::Jump(_), None | Some("energy_error")) => TolKind::EnergyError,
            (ProblemKind::Jump(_), Some(other)) => {
                return Err(Error::InvalidParameter(format!(
                    "the jump problem stops on the energy error, not '{other}'"
                )));
            }
            (_, None | Some("rel_residual")) => TolKind::RelResidual,
            (_, Some("energy_error")) => {
                return Err(Error::InvalidParameter(
                    "energy_error stopping needs a known solution (jump problem only)".into(),
                ));
            }
            (_, Some(other)) => return Err(Error::InvalidParameter(format!("unknown tol_kind '{other}'"))),
        };
        let max_iter = get("max_iter")
            .map(|s| parse_num("max_iter", s))
            .transpose()?
            .unwrap_or(2000);
        let seed = get("seed")
            .map(|s| parse_num("seed", s))
            .transpose()?
            .unwrap_or(DEFAULT_SEED);
        let format = get("format").unwrap_or("csv").parse()?;
        let theta = get("theta")
            .map(|s| parse_num("theta", s))
            .transpose()?
            .unwrap_or(DEFAULT_THETA);

        Ok(ExperimentConfig {
            problem,
            rows,
            methods,
            smoother,
            tol,
            tol_kind,
            max_iter,
            seed,
            format,
            theta,
        })
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, s: &str) -> Result<T> {
    s.trim()
        .parse()
        .map_err(|_| Error::InvalidParameter(format!("{key}: cannot parse '{s}'")))
}

/// `5..9` and `5..=9` (both inclusive), `5,6,7`, or a single value.
pub fn parse_list(key: &str, s: &str) -> Result<Vec<usize>> {
    let s = s.trim();
    if let Some((lo, hi)) = s.split_once("..") {
        let hi = hi.strip_prefix('=').unwrap_or(hi);
        let (lo, hi): (usize, usize) = (parse_num(key, lo)?, parse_num(key, hi)?);
        if lo > hi {
            return Err(Error::InvalidParameter(format!("{key}: empty range '{s}'")));
        }
        return Ok((lo..=hi).collect());
    }
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| parse_num(key, t))
        .collect()
}

/// Parse `key = value` lines; `#` starts a comment.
pub fn parse_config(text: &str, path: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
            path: path.into(),
            line: i + 1,
            msg: format!("expected 'key = value', found '{line}'"),
        })?;
        map.insert(k.trim().replace('-', "_"), v.trim().to_string());
    }
    Ok(map)
}

pub fn read_config_file(path: impl AsRef<Path>) -> Result<BTreeMap<String, String>> {
    let path = path.as_ref();
    parse_config(&std::fs::read_to_string(path)?, &path.display().to_string())
}

/// Level index of a square grid with `size = (2^k - 1)^2` unknowns.
pub fn level_of_size(size: usize) -> Result<usize> {
    (2..=crate::problems::MAX_LEVEL)
        .find(|&k| ((1usize << k) - 1).pow(2) == size)
        .ok_or_else(|| Error::InvalidParameter(format!("size {size} is not (2^k - 1)^2")))
}

/// Everything needed to run one table row.
#[derive(Debug, Clone)]
pub struct RowSetup {
    pub hierarchy: Hierarchy,
    pub f: Vec<f64>,
    pub u0: Vec<f64>,
    pub u_exact: Option<Vec<f64>>,
}

impl RowSetup {
    pub fn a(&self) -> &crate::CsrMatrix {
        self.hierarchy.a(self.hierarchy.finest())
    }
}

/// Assemble the problem and hierarchy of one row and its initial guess.
///
/// The jump problem has zero load and solution; its initial guess is a seeded
/// random vector of unit energy norm. Other problems start from zero.
pub fn setup_row(config: &ExperimentConfig, row: usize) -> Result<RowSetup> {
    let (hierarchy, f) = match config.problem {
        ProblemKind::Poisson => {
            let h = build_geometric(GeometricProblem::Poisson, row, config.smoother)?;
            let (_, f) = assemble_poisson(row)?;
            (h, f)
        }
        ProblemKind::Jump(low) => {
            let h = build_geometric(GeometricProblem::Jump { low }, row, config.smoother)?;
            let n = h.level(row).dim();
            (h, vec![0.0; n])
        }
        ProblemKind::UaPoisson => {
            let (a, f) = assemble_poisson(level_of_size(row)?)?;
            let h = build_ua_amg(
                &a,
                config.theta,
                DEFAULT_MIN_COARSE,
                DEFAULT_MAX_LEVELS,
                config.smoother,
            )?;
            (h, f)
        }
    };
    let n = f.len();
    let (u0, u_exact) = match config.problem {
        ProblemKind::Jump(_) => {
            let a = hierarchy.a(hierarchy.finest());
            let mut u0 = normal_vector(n, config.seed, "u0", row as u64);
            let e = dot(&a.mul_vec(&u0), &u0).sqrt();
            u0.iter_mut().for_each(|x| *x /= e);
            (u0, Some(vec![0.0; n]))
        }
        _ => (vec![0.0; n], None),
    };
    Ok(RowSetup {
        hierarchy,
        f,
        u0,
        u_exact,
    })
}

/// Solve one cell.
pub fn run_cell(config: &ExperimentConfig, setup: &RowSetup, method: &Method) -> Result<SolveReport> {
    let h = &setup.hierarchy;
    let k = h.finest();
    let stop = StopCriterion {
        tol: config.tol,
        kind: config.tol_kind,
        max_iter: config.max_iter,
    };
    stationary_solve(
        |r| method.apply(h, k, r),
        setup.a(),
        &setup.f,
        &setup.u0,
        stop,
        setup.u_exact.as_deref(),
    )
}

#[derive(Debug, Clone)]
pub struct Table {
    pub row_label: &'static str,
    pub rows: Vec<usize>,
    pub columns: Vec<String>,
    /// `cells[row][column]`.
    pub cells: Vec<Vec<SolveReport>>,
    pub max_iter: usize,
}

impl Table {
    pub fn all_converged(&self) -> bool {
        self.cells.iter().flatten().all(|r| r.converged)
    }

    /// Iteration count of a cell, `None` if it did not converge.
    pub fn count(&self, row: usize, column: usize) -> Option<usize> {
        let r = &self.cells[row][column];
        r.converged.then_some(r.iterations)
    }

    pub fn column_index(&self, label: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == label)
    }
}

/// Run every (row, column) cell. Cells are solved in parallel; the result is
/// ordered by row, then column.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Table> {
    let label = config.problem.row_label();
    let setups: Vec<Result<RowSetup>> = par::map_slice(&config.rows, |&row| {
        setup_row(config, row).map_err(|e| e.at(format!("{label}={row}")))
    });
    let setups = setups.into_iter().collect::<Result<Vec<_>>>()?;

    let n_cols = config.methods.len();
    let flat: Vec<Result<SolveReport>> = par::map_indices(setups.len() * n_cols, |idx| {
        let (i, j) = (idx / n_cols, idx % n_cols);
        let m = &config.methods[j];
        run_cell(config, &setups[i], m).map_err(|e| e.at(format!("{label}={}, column {}", config.rows[i], m.label())))
    });
    let mut flat = flat.into_iter();
    let mut cells = Vec::with_capacity(setups.len());
    for _ in 0..setups.len() {
        cells.push(flat.by_ref().take(n_cols).collect::<Result<Vec<_>>>()?);
    }
    Ok(Table {
        row_label: label,
        rows: config.rows.clone(),
        columns: config.methods.iter().map(Method::label).collect(),
        cells,
        max_iter: config.max_iter,
    })
}

/// Render a table. Non-converged cells read `>max_iter`.
pub fn emit_table(table: &Table, format: OutputFormat) -> String {
    let cell = |r: &SolveReport| {
        if r.converged {
            r.iterations.to_string()
        } else {
            format!(">{}", table.max_iter)
        }
    };
    let mut out = String::new();
    let header: Vec<&str> = std::iter::once(table.row_label)
        .chain(table.columns.iter().map(String::as_str))
        .collect();
    match format {
        OutputFormat::Csv => {
            let _ = writeln!(out, "{}", header.join(","));
            for (row, cells) in table.rows.iter().zip(&table.cells) {
                let vals: Vec<String> = cells.iter().map(cell).collect();
                let _ = writeln!(out, "{row},{}", vals.join(","));
            }
        }
        OutputFormat::Markdown => {
            let _ = writeln!(out, "| {} |", header.join(" | "));
            let _ = writeln!(out, "|{}", "---|".repeat(header.len()));
            for (row, cells) in table.rows.iter().zip(&table.cells) {
                let vals: Vec<String> = cells.iter().map(cell).collect();
                let _ = writeln!(out, "| {row} | {} |", vals.join(" | "));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn map(pairs: &[(&str, &str)]) -> BTreeMap<String, String> {
        pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    #[test]
    fn default_columns_follow_table_layout() {
        let c = ExperimentConfig::from_map(&BTreeMap::new()).unwrap();
        let labels: Vec<String> = c.methods.iter().map(Method::label).collect();
        assert_eq!(
            labels,
            ["B", "B^ N-PCG(1)", "B^ N-PCG(2)", "B~ N-PCG(1)", "B~ N-PCG(2)"]
        );
        assert_eq!(c.rows, vec![5, 6, 7, 8, 9]);
        assert_eq!(c.tol_kind, TolKind::RelResidual);
    }

    #[test]
    fn jump_forces_energy_error() {
        let c = ExperimentConfig::from_map(&map(&[("problem", "jump")])).unwrap();
        assert_eq!(c.tol_kind, TolKind::EnergyError);
        assert!(ExperimentConfig::from_map(&map(&[("problem", "jump"), ("tol_kind", "rel_residual")])).is_err());
        assert!(ExperimentConfig::from_map(&map(&[("tol_kind", "energy_error")])).is_err());
    }

    #[test]
    fn rejects_bad_input() {
        for (k, v) in [
            ("tol", "0"),
            ("tol", "-1"),
            ("levels", "7..5"),
            ("npcg", "0"),
            ("cycle", "w"),
            ("colour", "red"),
        ] {
            assert!(ExperimentConfig::from_map(&map(&[(k, v)])).is_err(), "{k}={v}");
        }
    }

    #[test]
    fn list_syntax() {
        assert_eq!(parse_list("x", "5..9").unwrap(), vec![5, 6, 7, 8, 9]);
        assert_eq!(parse_list("x", "5..=6").unwrap(), vec![5, 6]);
        assert_eq!(parse_list("x", "3, 16").unwrap(), vec![3, 16]);
    }

    #[test]
    fn config_file_comments() {
        let m = parse_config("# table\nproblem = jump # inline\n\nmax-iter=10\n", "t").unwrap();
        assert_eq!(m, map(&[("problem", "jump"), ("max_iter", "10")]));
        assert!(parse_config("oops\n", "t").is_err());
    }

    #[test]
    fn sizes_map_to_levels() {
        assert_eq!(level_of_size(3969).unwrap(), 6);
        assert_eq!(level_of_size(16129).unwrap(), 7);
        assert_eq!(level_of_size(65025).unwrap(), 8);
        assert!(level_of_size(4000).is_err());
        let c = ExperimentConfig::from_map(&map(&[("problem", "ua_poisson"), ("levels", "6..7")])).unwrap();
        assert_eq!(c.rows, vec![3969, 16129]);
    }

    #[test]
    fn small_table_formats_agree() {
        let mut c = ExperimentConfig::from_map(&map(&[("levels", "3..4"), ("max_iter", "3")])).unwrap();
        let t = run_experiment(&c).unwrap();
        assert_eq!(t.cells.len(), 2);
        assert!(t.cells.iter().all(|r| r.len() == 5));
        let csv = emit_table(&t, OutputFormat::Csv);
        let md = emit_table(&t, OutputFormat::Markdown);
        let strip = |s: &str| -> Vec<Vec<String>> {
            s.lines()
                .filter(|l| !l.starts_with("|-"))
                .map(|l| {
                    l.split([',', '|'])
                        .map(|x| x.trim().to_string())
                        .filter(|x| !x.is_empty())
                        .collect()
                })
                .collect()
        };
        assert_eq!(strip(&csv), strip(&md));
        assert!(csv.contains(">3"), "V-cycle should not converge in 3 steps:\n{csv}");

        c.rows = vec![1];
        let err = run_experiment(&c).unwrap_err().to_string();
        assert!(err.contains("k=1"), "{err}");
    }
}
