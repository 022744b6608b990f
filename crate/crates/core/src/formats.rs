//! CSV formats shared by the pipelines and the command-line tool.
//!
//! | file    | columns                                   |
//! |---------|-------------------------------------------|
//! | VOT     | `type,vot`                                |
//! | demand  | `type,origin,destination,demand[,day]`    |
//! | tolls   | `edge,type,price`                         |
//! | support | one edge id per line, `#` starts a comment |
//!
//! In a toll file the type column is `*` for a price shared by all types.
//! Edges that do not appear are outside the support. Lines starting with
//! `#` are skipped in every CSV file.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{DemandMatrix, Network, TollKind, TollScheme, TravelerType, VotProfile};

pub const ALL_TYPES: &str = "*";

pub(crate) fn read_rows<T: DeserializeOwned, R: Read>(reader: R) -> Result<Vec<T>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);
    let mut out = Vec::new();
    for row in rdr.deserialize() {
        out.push(row?);
    }
    Ok(out)
}

pub(crate) fn write_rows<T: Serialize, W: Write>(writer: W, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_vot_csv<R: Read>(reader: R) -> Result<VotProfile> {
    #[derive(Deserialize)]
    struct Row {
        #[serde(rename = "type")]
        label: String,
        vot: f64,
    }
    let rows: Vec<Row> = read_rows(reader)?;
    VotProfile::from_types(
        rows.into_iter()
            .map(|r| TravelerType { label: r.label, vot: r.vot })
            .collect(),
    )
}

pub fn write_vot_csv<W: Write>(writer: W, vot: &VotProfile) -> Result<()> {
    #[derive(Serialize)]
    struct Row<'a> {
        #[serde(rename = "type")]
        label: &'a str,
        vot: f64,
    }
    let rows: Vec<Row> = vot
        .types()
        .iter()
        .map(|t| Row { label: &t.label, vot: t.vot })
        .collect();
    write_rows(writer, &rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemandRow {
    #[serde(rename = "type")]
    pub type_label: String,
    pub origin: String,
    pub destination: String,
    pub demand: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub day: Option<String>,
}

/// A demand matrix, tagged with its day when the file has one.
#[derive(Debug, Clone, PartialEq)]
pub struct DatedDemand {
    pub day: Option<String>,
    pub demand: DemandMatrix,
}

/// Reads a demand file. Rows are grouped by day (sorted); missing
/// (type, OD) entries are zero and repeated entries are rejected.
pub fn read_demand_csv<R: Read>(
    reader: R,
    net: &Network,
    vot: &VotProfile,
) -> Result<Vec<DatedDemand>> {
    let rows: Vec<DemandRow> = read_rows(reader)?;
    demand_from_rows(&rows, net, vot)
}

pub fn demand_from_rows(
    rows: &[DemandRow],
    net: &Network,
    vot: &VotProfile,
) -> Result<Vec<DatedDemand>> {
    let mut days: BTreeMap<Option<String>, (DemandMatrix, BTreeSet<(usize, usize)>)> =
        BTreeMap::new();
    for row in rows {
        let i = vot
            .index_of(&row.type_label)
            .ok_or_else(|| Error::structural(format!("unknown type `{}`", row.type_label)))?;
        let k = net.od_index(&row.origin, &row.destination).ok_or_else(|| {
            Error::structural(format!(
                "unknown od pair {}->{}",
                row.origin, row.destination
            ))
        })?;
        let (m, seen) = days.entry(row.day.clone()).or_insert_with(|| {
            (DemandMatrix::zeros(vot.len(), net.num_od_pairs()), BTreeSet::new())
        });
        if !seen.insert((i, k)) {
            return Err(Error::invalid(format!(
                "repeated demand for type `{}` on {}->{}",
                row.type_label, row.origin, row.destination
            )));
        }
        m.set(i, k, row.demand)?;
    }
    if days.len() > 1 && days.contains_key(&None) {
        return Err(Error::invalid("demand file mixes rows with and without a day"));
    }
    if days.is_empty() {
        days.insert(None, (DemandMatrix::zeros(vot.len(), net.num_od_pairs()), BTreeSet::new()));
    }
    Ok(days
        .into_iter()
        .map(|(day, (demand, _))| DatedDemand { day, demand })
        .collect())
}

pub fn demand_rows(
    net: &Network,
    vot: &VotProfile,
    demand: &DemandMatrix,
    day: Option<&str>,
) -> Vec<DemandRow> {
    let mut rows = Vec::new();
    for i in 0..vot.len() {
        for k in 0..net.num_od_pairs() {
            let (o, d) = net.od_label(k);
            rows.push(DemandRow {
                type_label: vot.label(i).to_string(),
                origin: o.to_string(),
                destination: d.to_string(),
                demand: demand.get(i, k),
                day: day.map(str::to_string),
            });
        }
    }
    rows
}

pub fn write_demand_csv<W: Write>(
    writer: W,
    net: &Network,
    vot: &VotProfile,
    demands: &[DatedDemand],
) -> Result<()> {
    let rows: Vec<DemandRow> = demands
        .iter()
        .flat_map(|d| demand_rows(net, vot, &d.demand, d.day.as_deref()))
        .collect();
    write_rows(writer, &rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct TollRow {
    edge: String,
    #[serde(rename = "type")]
    type_label: String,
    price: f64,
}

pub fn read_tolls_csv<R: Read>(reader: R, net: &Network, vot: &VotProfile) -> Result<TollScheme> {
    let rows: Vec<TollRow> = read_rows(reader)?;
    let shared = rows.iter().filter(|r| r.type_label == ALL_TYPES).count();
    if shared != 0 && shared != rows.len() {
        return Err(Error::invalid(
            "toll file mixes shared (`*`) and per-type prices",
        ));
    }
    let homogeneous = shared == rows.len();
    let n_edges = net.num_edges();
    let mut prices = vec![vec![0.0; n_edges]; if homogeneous { 1 } else { vot.len() }];
    let mut seen = BTreeSet::new();
    let mut support = BTreeSet::new();
    for row in &rows {
        let e = net
            .edge_index(&row.edge)
            .ok_or_else(|| Error::structural(format!("unknown edge `{}`", row.edge)))?;
        let i = if homogeneous {
            0
        } else {
            vot.index_of(&row.type_label)
                .ok_or_else(|| Error::structural(format!("unknown type `{}`", row.type_label)))?
        };
        if !seen.insert((e, i)) {
            return Err(Error::invalid(format!("repeated toll for edge `{}`", row.edge)));
        }
        prices[i][e] = row.price;
        support.insert(e);
    }
    let scheme = if homogeneous {
        TollScheme::homogeneous(prices.swap_remove(0), vot.len())?
    } else {
        TollScheme::heterogeneous(prices)?
    };
    scheme.with_support(&support)
}

pub fn write_tolls_csv<W: Write>(
    writer: W,
    net: &Network,
    vot: &VotProfile,
    tolls: &TollScheme,
) -> Result<()> {
    tolls.check_shape(net, vot)?;
    let mut rows = Vec::new();
    for e in tolls.support() {
        let edge = net.edge(e).id.clone();
        match tolls.kind() {
            TollKind::Homogeneous => rows.push(TollRow {
                edge,
                type_label: ALL_TYPES.to_string(),
                price: tolls.price(e, 0),
            }),
            TollKind::Heterogeneous => {
                for i in 0..vot.len() {
                    rows.push(TollRow {
                        edge: edge.clone(),
                        type_label: vot.label(i).to_string(),
                        price: tolls.price(e, i),
                    });
                }
            }
        }
    }
    if rows.is_empty() {
        // csv writes no header for an empty row set.
        let mut w = writer;
        writeln!(w, "edge,type,price")?;
        return Ok(());
    }
    write_rows(writer, &rows)
}

/// Parses a support file into edge indices.
pub fn parse_support(text: &str, net: &Network) -> Result<BTreeSet<usize>> {
    let mut out = BTreeSet::new();
    for line in text.lines() {
        let id = line.split('#').next().unwrap_or("").trim();
        if id.is_empty() {
            continue;
        }
        let e = net
            .edge_index(id)
            .ok_or_else(|| Error::structural(format!("support lists unknown edge `{id}`")))?;
        out.insert(e);
    }
    Ok(out)
}
