use std::path::PathBuf;
use std::time::Instant;

use clap::Args;
use serde::Serialize;

use super::input::{self, Selection};
use super::{with_workers, Format};
use leafshap::estimators::ReducedValue;
use leafshap::shapley::{reports_to_csv, reports_to_json};
use leafshap::tree::read_model;
use leafshap::{explain_batch, Algorithm, ColumnSet, Error, Estimator, ExplainOptions, Explainer, SVReport};

#[derive(Debug, Args)]
#[command(args_override_self = true)]
pub struct ExplainArgs {
    /// Model JSON.
    #[arg(long)]
    pub model: PathBuf,
    /// Reference dataset CSV; required by every estimator but shap_path.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Schema sidecar for --data and --query; without it all columns are continuous.
    #[arg(long)]
    pub schema: Option<PathBuf>,
    /// Rows to explain; defaults to the rows of --data.
    #[arg(long)]
    pub query: Option<PathBuf>,
    /// Player partition JSON; defaults to one player per column.
    #[arg(long)]
    pub players: Option<PathBuf>,
    /// all, a..b, a..=b or a comma list of row ids.
    #[arg(long, default_value = "all")]
    pub instances: Selection,
    #[arg(long, default_value = "leaf")]
    pub estimator: Estimator,
    #[arg(long, default_value = "brute_force")]
    pub algorithm: Algorithm,
    /// Quantile-bin continuous columns into this many bins first.
    #[arg(long)]
    pub q: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
    #[arg(long)]
    pub workers: Option<usize>,
    /// Evaluate sequentially for reproducible output.
    #[arg(long)]
    pub strict: bool,
    /// Also report the reduced value at this column subset (names or indices).
    #[arg(long, value_name = "COLUMNS")]
    pub diagnose_subset: Option<String>,
}

#[derive(Serialize)]
struct Diagnostic {
    instance: usize,
    subset: Vec<usize>,
    #[serde(flatten)]
    reduced: ReducedValue,
}

#[derive(Serialize)]
struct WithDiagnostics<'a> {
    reports: &'a [SVReport],
    diagnostics: Vec<Diagnostic>,
}

pub fn run(a: ExplainArgs) -> anyhow::Result<()> {
    input::require(&a.model, "model")?;
    input::require_all(&[
        (&a.data, "data file"),
        (&a.schema, "schema"),
        (&a.query, "query file"),
        (&a.players, "player partition"),
    ])?;
    a.algorithm.check(a.estimator)?;
    if a.diagnose_subset.is_some() && a.format == Format::Csv {
        return Err(Error::Config("--diagnose-subset needs --format json".into()).into());
    }
    if a.query.is_none() && a.data.is_none() {
        return Err(Error::Config("give --data or --query rows to explain".into()).into());
    }
    if a.estimator.needs_data() && a.data.is_none() {
        return Err(Error::Config(format!("estimator {} needs --data", a.estimator)).into());
    }

    let model = read_model(&a.model)?;
    let schema = a.schema.as_deref();
    let mut data = a.data.as_deref().map(|p| input::load_data(p, schema)).transpose()?;
    let mut query = a.query.as_deref().map(|p| input::load_data(p, schema)).transpose()?;
    if let Some(q) = a.q {
        let d = data
            .as_ref()
            .ok_or_else(|| Error::Config("--q needs --data to learn bin edges".into()))?;
        let (binned, binned_query) = input::discretize(d, query.as_ref(), q)?;
        data = Some(binned);
        query = binned_query;
    }
    let rows_source = query.as_ref().or(data.as_ref()).expect("checked above");
    let ids = a.instances.rows(rows_source.n_rows())?;
    let rows: Vec<Vec<f64>> = ids.iter().map(|&r| rows_source.row(r)).collect();
    let names = rows_source.names();

    let labels = model
        .feature_names()
        .map(<[String]>::to_vec)
        .unwrap_or_else(|| names.clone());
    let partition = input::partition(a.players.as_deref(), labels)?;
    let explainer = Explainer::new(model, data, partition)?;
    let options = ExplainOptions {
        strict: a.strict,
        ..ExplainOptions::default()
    };

    let start = Instant::now();
    let reports = with_workers(a.workers, || {
        explain_batch(&explainer, &rows, &ids, a.estimator, a.algorithm, &options)
    })??;
    let elapsed = start.elapsed();

    let text = match (a.format, &a.diagnose_subset) {
        (Format::Csv, _) => reports_to_csv(&reports)?,
        (Format::Json, None) => reports_to_json(&reports),
        (Format::Json, Some(spec)) => {
            let subset = input::columns(spec, &names)?;
            let set = ColumnSet::from_indices(explainer.n_columns(), &subset);
            let diagnostics = rows
                .iter()
                .zip(&ids)
                .map(|(x, &id)| {
                    let reduced = explainer.reduced(x, &set, a.estimator).map_err(|e| e.in_instance(id))?;
                    Ok(Diagnostic {
                        instance: id,
                        subset: subset.clone(),
                        reduced,
                    })
                })
                .collect::<leafshap::Result<Vec<_>>>()?;
            let doc = WithDiagnostics {
                reports: &reports,
                diagnostics,
            };
            serde_json::to_string_pretty(&doc)? + "\n"
        }
    };
    input::emit(a.out.as_deref(), &text)?;
    eprintln!(
        "explained {} instances with {}/{} in {:.3} s",
        reports.len(),
        a.estimator,
        a.algorithm,
        elapsed.as_secs_f64()
    );
    Ok(())
}
