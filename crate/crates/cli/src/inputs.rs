use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context, Result};
use equitoll::formats::{parse_support, read_demand_csv, read_tolls_csv, read_vot_csv, DatedDemand};
use equitoll::network::{DemandMatrix, Network, NetworkSpec, TollScheme, VotProfile};
use serde::Deserialize;

use crate::output::RunConfig;

pub fn network(cfg: &mut RunConfig, path: &Path) -> Result<(NetworkSpec, Network)> {
    let text = cfg.read_string("network", path)?;
    let spec = NetworkSpec::from_json(&text).with_context(|| format!("parsing {}", path.display()))?;
    let net = spec.build().with_context(|| format!("building network from {}", path.display()))?;
    Ok((spec, net))
}

pub fn vot(cfg: &mut RunConfig, path: &Path) -> Result<VotProfile> {
    let bytes = cfg.read("vot", path)?;
    read_vot_csv(bytes.as_slice()).with_context(|| format!("parsing {}", path.display()))
}

pub fn demand_days(
    cfg: &mut RunConfig,
    path: &Path,
    net: &Network,
    vot: &VotProfile,
) -> Result<Vec<DatedDemand>> {
    let bytes = cfg.read("demand", path)?;
    read_demand_csv(bytes.as_slice(), net, vot).with_context(|| format!("parsing {}", path.display()))
}

/// One demand matrix: the file's only one, or the one tagged `day`.
pub fn demand(
    cfg: &mut RunConfig,
    path: &Path,
    net: &Network,
    vot: &VotProfile,
    day: Option<&str>,
) -> Result<DemandMatrix> {
    let mut days = demand_days(cfg, path, net, vot)?;
    cfg.option("day", day);
    match day {
        Some(d) => match days.iter().position(|x| x.day.as_deref() == Some(d)) {
            Some(i) => Ok(days.swap_remove(i).demand),
            None => bail!("{} has no rows for day `{d}`", path.display()),
        },
        None if days.len() == 1 => Ok(days.swap_remove(0).demand),
        None => {
            let names: Vec<_> = days.iter().filter_map(|d| d.day.clone()).collect();
            bail!(
                "{} holds {} days ({}); pick one with --day",
                path.display(),
                names.len(),
                names.join(", ")
            )
        }
    }
}

pub fn tolls(
    cfg: &mut RunConfig,
    path: Option<&Path>,
    net: &Network,
    vot: &VotProfile,
) -> Result<TollScheme> {
    match path {
        Some(p) => {
            let bytes = cfg.read("tolls", p)?;
            read_tolls_csv(bytes.as_slice(), net, vot).with_context(|| format!("parsing {}", p.display()))
        }
        None => Ok(TollScheme::zero(net.num_edges(), vot.len())),
    }
}

pub fn support(
    cfg: &mut RunConfig,
    path: Option<&Path>,
    net: &Network,
) -> Result<Option<std::collections::BTreeSet<usize>>> {
    let Some(p) = path else { return Ok(None) };
    let text = cfg.read_string("support", p)?;
    Ok(Some(parse_support(&text, net).with_context(|| format!("parsing {}", p.display()))?))
}

/// Observed daily edge flows from a `edge,day,flow[,...]` file, as written
/// by `calibrate`.
pub fn observed_flows(
    cfg: &mut RunConfig,
    path: &Path,
    net: &Network,
) -> Result<BTreeMap<String, Vec<Option<f64>>>> {
    #[derive(Deserialize)]
    struct Row {
        edge: String,
        day: String,
        flow: f64,
    }
    let bytes = cfg.read("observed", path)?;
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(bytes.as_slice());
    let mut out: BTreeMap<String, Vec<Option<f64>>> = BTreeMap::new();
    for row in rdr.deserialize() {
        let row: Row = row.with_context(|| format!("parsing {}", path.display()))?;
        let Some(e) = net.edge_index(&row.edge) else {
            bail!("{}: edge `{}` is not in the network", path.display(), row.edge);
        };
        let slot = &mut out.entry(row.day.clone()).or_insert_with(|| vec![None; net.num_edges()])[e];
        if slot.replace(row.flow).is_some() {
            bail!("{}: repeated flow for edge `{}` on {}", path.display(), row.edge, row.day);
        }
    }
    Ok(out)
}
