//! Network and draw file formats.
//!
//! Edge lists hold one whitespace-separated pair of 1-based actor ids per
//! line. `#` starts a comment; a comment of the form `# n=18 directed=true`
//! fixes the actor count and directedness. Adjacency files hold a square
//! comma-separated 0/1 matrix.
//!
//! Draws are written as CSV with header `iter,G,beta,loglik,logpost,k_1..k_n`
//! (1-based labels) and positions as `iter,actor,x_1..x_d`, one row per
//! actor of each draw, in the same draw order.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use crate::error::{invalid, Error, Result};
use crate::network::Network;
use crate::positions::Positions;
use crate::sampler::DrawRecord;
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NetworkFormat {
    EdgeList,
    Adjacency,
}

impl FromStr for NetworkFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "edgelist" => Ok(Self::EdgeList),
            "adjacency" => Ok(Self::Adjacency),
            other => Err(invalid(format!("unknown network format '{other}' (expected edgelist or adjacency)"))),
        }
    }
}

impl std::fmt::Display for NetworkFormat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::EdgeList => "edgelist",
            Self::Adjacency => "adjacency",
        })
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

pub(crate) fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io { path: path.display().to_string(), message: e.to_string() })
}

/// Reads a network file. For edge lists `directed = None` defers to the
/// file's directive and otherwise to undirected; adjacency files default to
/// undirected.
pub fn read_network(path: &Path, format: NetworkFormat, directed: Option<bool>) -> Result<Network> {
    let text = read_text(path)?;
    match format {
        NetworkFormat::EdgeList => parse_edge_list(&text, directed),
        NetworkFormat::Adjacency => parse_adjacency(&text, directed.unwrap_or(false)),
    }
}

fn parse_directive(comment: &str, line: usize, n: &mut Option<usize>, directed: &mut Option<bool>) -> Result<()> {
    for token in comment.split_whitespace() {
        let Some((key, value)) = token.split_once('=') else { continue };
        match key {
            "n" => *n = Some(value.parse().map_err(|_| parse_err(line, format!("bad actor count '{value}'")))?),
            "directed" => {
                *directed = Some(value.parse().map_err(|_| parse_err(line, format!("bad directed flag '{value}'")))?)
            }
            _ => {}
        }
    }
    Ok(())
}

/// Parses an edge list; `directed` overrides the file's directive.
pub fn parse_edge_list(text: &str, directed: Option<bool>) -> Result<Network> {
    let mut n_directive = None;
    let mut directed_directive = None;
    let mut edges: Vec<(usize, usize, usize)> = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let (body, comment) = match raw.split_once('#') {
            Some((b, c)) => (b, Some(c)),
            None => (raw, None),
        };
        if let Some(c) = comment {
            parse_directive(c, line, &mut n_directive, &mut directed_directive)?;
        }
        let tokens: Vec<&str> = body.split_whitespace().collect();
        if tokens.is_empty() {
            continue;
        }
        if tokens.len() != 2 {
            return Err(parse_err(line, format!("expected two actor ids, found {} fields", tokens.len())));
        }
        let id = |t: &str| -> Result<usize> {
            let v: usize = t.parse().map_err(|_| parse_err(line, format!("'{t}' is not a positive integer id")))?;
            if v == 0 {
                return Err(parse_err(line, "actor ids are 1-based"));
            }
            Ok(v)
        };
        let (a, b) = (id(tokens[0])?, id(tokens[1])?);
        if a == b {
            return Err(parse_err(line, format!("self-tie on actor {a}")));
        }
        edges.push((line, a, b));
    }
    let n = n_directive.unwrap_or_else(|| edges.iter().map(|&(_, a, b)| a.max(b)).max().unwrap_or(0));
    if let Some(&(line, a, b)) = edges.iter().find(|&&(_, a, b)| a > n || b > n) {
        return Err(parse_err(line, format!("actor id {} exceeds n = {n}", a.max(b))));
    }
    let directed = directed.or(directed_directive).unwrap_or(false);
    let pairs: Vec<(usize, usize)> = edges.iter().map(|&(_, a, b)| (a - 1, b - 1)).collect();
    Network::from_edges(n, directed, &pairs)
}

/// Parses a comma-separated square 0/1 adjacency matrix.
pub fn parse_adjacency(text: &str, directed: bool) -> Result<Network> {
    let mut rows: Vec<(usize, Vec<bool>)> = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let row = body
            .split(',')
            .map(|t| match t.trim() {
                "0" => Ok(false),
                "1" => Ok(true),
                other => Err(parse_err(line, format!("entry '{other}' is not 0 or 1"))),
            })
            .collect::<Result<Vec<bool>>>()?;
        if let Some((_, first)) = rows.first() {
            if row.len() != first.len() {
                return Err(parse_err(line, format!("row has {} entries, expected {}", row.len(), first.len())));
            }
        }
        rows.push((line, row));
    }
    let n = rows.len();
    if let Some((line, r)) = rows.first() {
        if r.len() != n {
            return Err(parse_err(*line, format!("matrix has {n} rows but {} columns", r.len())));
        }
    }
    for (i, (line, r)) in rows.iter().enumerate() {
        if r[i] {
            return Err(parse_err(*line, format!("nonzero diagonal entry for actor {}", i + 1)));
        }
        if !directed {
            if let Some(j) = (0..i).find(|&j| rows[j].1[i] != r[j]) {
                return Err(parse_err(*line, format!("undirected matrix is asymmetric at ({}, {})", i + 1, j + 1)));
            }
        }
    }
    Network::from_adjacency(n, directed, rows.into_iter().flat_map(|(_, r)| r).collect())
}

/// Edge list with a directive header; undirected ties are written once (`i < j`).
pub fn format_edge_list(net: &Network) -> String {
    let mut out = format!("# n={} directed={}\n", net.n(), net.directed());
    for (i, j) in net.edges() {
        let _ = writeln!(out, "{} {}", i + 1, j + 1);
    }
    out
}

pub fn format_adjacency(net: &Network) -> String {
    let mut out = String::new();
    for i in 0..net.n() {
        let row: Vec<&str> = net.row(i).iter().map(|&y| if y { "1" } else { "0" }).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Version of the draws/positions CSV layout.
pub const DRAWS_SCHEMA_VERSION: u32 = 1;

pub fn draws_header(n: usize) -> String {
    let mut h = String::from("iter,G,beta,loglik,logpost");
    for i in 1..=n {
        let _ = write!(h, ",k_{i}");
    }
    h
}

pub fn positions_header(d: usize) -> String {
    let mut h = String::from("iter,actor");
    for c in 1..=d {
        let _ = write!(h, ",x_{c}");
    }
    h
}

pub fn format_draws_csv<T: Real>(draws: &[DrawRecord<T>], n: usize) -> String {
    let mut out = draws_header(n);
    out.push('\n');
    for d in draws {
        let _ = write!(out, "{},{},{},{},{}", d.iter, d.g, d.beta, d.loglik, d.logpost);
        for &k in &d.alloc {
            let _ = write!(out, ",{}", k + 1);
        }
        out.push('\n');
    }
    out
}

pub fn format_positions_csv<T: Real>(draws: &[DrawRecord<T>], d: usize) -> String {
    let mut out = positions_header(d);
    out.push('\n');
    for rec in draws {
        for (i, row) in rec.z.rows().enumerate() {
            let _ = write!(out, "{},{}", rec.iter, i + 1);
            for x in row {
                let _ = write!(out, ",{x}");
            }
            out.push('\n');
        }
    }
    out
}

fn fields(line: &str) -> Vec<&str> {
    line.split(',').map(str::trim).collect()
}

fn num<F: FromStr>(s: &str, line: usize, what: &str) -> Result<F> {
    s.parse().map_err(|_| parse_err(line, format!("bad {what} '{s}'")))
}

/// Reads draws back from the two CSV files. Chain indices are not stored and
/// come back as 0.
pub fn parse_draws(draws_csv: &str, positions_csv: &str) -> Result<Vec<DrawRecord<f64>>> {
    let mut lines = draws_csv.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or_else(|| parse_err(1, "draws file is empty"))?;
    let head = fields(header);
    if head.len() < 5 || head[..5] != ["iter", "G", "beta", "loglik", "logpost"] {
        return Err(parse_err(1, "unexpected draws header"));
    }
    let n = head.len() - 5;
    if draws_header(n) != head.join(",") {
        return Err(parse_err(1, "unexpected allocation columns in draws header"));
    }
    let mut plines = positions_csv.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, pheader) = plines.next().ok_or_else(|| parse_err(1, "positions file is empty"))?;
    let phead = fields(pheader);
    if phead.len() < 3 || positions_header(phead.len() - 2) != phead.join(",") {
        return Err(parse_err(1, "unexpected positions header"));
    }
    let d = phead.len() - 2;
    let mut out = Vec::new();
    for (k, l) in lines {
        let line = k + 1;
        let f = fields(l);
        if f.len() != n + 5 {
            return Err(parse_err(line, format!("expected {} fields, found {}", n + 5, f.len())));
        }
        let iter: usize = num(f[0], line, "iteration")?;
        let g: usize = num(f[1], line, "G")?;
        let alloc = f[5..]
            .iter()
            .map(|s| {
                let k: usize = num(s, line, "label")?;
                if k == 0 || k > g {
                    return Err(parse_err(line, format!("label {k} outside 1..={g}")));
                }
                Ok(k - 1)
            })
            .collect::<Result<Vec<_>>>()?;
        let mut data = Vec::with_capacity(n * d);
        for actor in 1..=n {
            let (pk, pl) = plines.next().ok_or_else(|| parse_err(line, "positions file ends early"))?;
            let pf = fields(pl);
            if pf.len() != d + 2 {
                return Err(parse_err(pk + 1, "wrong number of position fields"));
            }
            if num::<usize>(pf[0], pk + 1, "iteration")? != iter || num::<usize>(pf[1], pk + 1, "actor")? != actor {
                return Err(parse_err(pk + 1, format!("expected iteration {iter}, actor {actor}")));
            }
            for s in &pf[2..] {
                data.push(num(s, pk + 1, "coordinate")?);
            }
        }
        out.push(DrawRecord {
            iter,
            chain: 0,
            g,
            beta: num(f[2], line, "beta")?,
            alloc,
            z: Positions::from_vec(n, d, data)?,
            loglik: num(f[3], line, "loglik")?,
            logpost: num(f[4], line, "logpost")?,
        });
    }
    if let Some((pk, _)) = plines.next() {
        return Err(parse_err(pk + 1, "positions file has rows without a matching draw"));
    }
    Ok(out)
}

/// [`parse_draws`] from files.
pub fn read_draws(draws_path: &Path, positions_path: &Path) -> Result<Vec<DrawRecord<f64>>> {
    parse_draws(&read_text(draws_path)?, &read_text(positions_path)?)
}
