use anyhow::{Context, Result};
use itlp::generator::{generate, GenSpec};

use crate::commands::{engine_name, label, run_engine, variant_spec};
use crate::table::{print_header, print_row, BenchRow, CSV_HEADER};
use crate::{BenchArgs, UsageError, VariantArg, EXIT_OK};

struct Cell {
    n: usize,
    p: usize,
    seed: u64,
    l: Option<usize>,
    q: Option<usize>,
}

fn cells(a: &BenchArgs) -> Result<Vec<Cell>> {
    let (needs_l, needs_q) = match a.variant {
        VariantArg::Base | VariantArg::Handling => (true, false),
        VariantArg::MinLinks => (false, true),
        VariantArg::Pl => (true, true),
    };
    let list = |values: &[usize], needed: bool, flag: &str| -> Result<Vec<Option<usize>>> {
        match (needed, values.is_empty()) {
            (true, true) => Err(UsageError(format!("this variant needs {flag}")).into()),
            (false, false) => Err(UsageError(format!("this variant does not take {flag}")).into()),
            (true, false) => Ok(values.iter().map(|&v| Some(v)).collect()),
            (false, true) => Ok(vec![None]),
        }
    };
    let ls = list(&a.l_values, needs_l, "--l")?;
    let qs = list(&a.q_values, needs_q, "--q")?;
    let mut out = Vec::new();
    for &n in &a.n {
        for &p in &a.p {
            for &seed in &a.seeds {
                for &q in &qs {
                    for &l in &ls {
                        out.push(Cell { n, p, seed, l, q });
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Runs the sweep cell by cell in order; a failing cell becomes an error
/// row and the sweep continues.
pub(crate) fn run(a: BenchArgs) -> Result<u8> {
    let cells = cells(&a)?;
    if a.variant == VariantArg::Handling && a.t_seed.is_none() {
        return Err(UsageError("variant handling requires --t-seed".into()).into());
    }
    let engine = engine_name(a.engine.engine);
    let mut rows = Vec::with_capacity(cells.len());
    let mut printed_header = false;
    for c in cells {
        let row = (|| -> Result<BenchRow> {
            let inst = generate(&GenSpec::new(c.n, c.p, c.seed))?;
            let spec = variant_spec(a.variant, c.l, c.q, a.t_seed, a.t_max, a.link_mode, c.p)?;
            if !printed_header {
                print_header(&spec);
                printed_header = true;
            }
            let name = label(&inst, &spec);
            let solved = run_engine(&inst, &spec, &a.engine)?;
            Ok(BenchRow::from_solution(&name, c.seed, &spec, engine, &solved.solution))
        })();
        let row = row.unwrap_or_else(|e| {
            let name = format!("{}C{}L", c.n, c.p);
            BenchRow::failed(&name, c.seed, "", engine, format!("{e:#}"))
        });
        print_row(&row);
        rows.push(row);
    }
    if let Some(path) = &a.csv {
        let mut w = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
        w.write_record(CSV_HEADER)?;
        for r in &rows {
            w.write_record(r.csv_record())?;
        }
        w.flush()?;
    }
    Ok(EXIT_OK)
}
