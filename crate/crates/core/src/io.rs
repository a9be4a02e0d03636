//! File formats: Matrix Market, edge lists, snapshot directories and
//! SocioPatterns contact logs.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::graph::{TemporalGraph, WeightedGraph};

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.display().to_string(),
        line,
        message: message.into(),
    }
}

fn open(path: &Path) -> Result<BufReader<fs::File>> {
    fs::File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::io(path, e))
}

fn create(path: &Path) -> Result<BufWriter<fs::File>> {
    fs::File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

/// How numeric Matrix Market values become edge weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WeightMode {
    /// Use values as stored; negative values are an error.
    #[default]
    AsIs,
    /// Use `|value|`, for matrices whose sign pattern is not a weight.
    Absolute,
    /// Ignore values and give every entry weight 1.
    Pattern,
}

/// Reads a square Matrix Market coordinate file as a graph.
///
/// Symmetric storage yields an undirected graph; general storage a directed
/// one. Pattern files get unit weights.
pub fn load_matrix_market(path: impl AsRef<Path>) -> Result<WeightedGraph> {
    load_matrix_market_with(path, WeightMode::AsIs)
}

pub fn load_matrix_market_with(path: impl AsRef<Path>, mode: WeightMode) -> Result<WeightedGraph> {
    let path = path.as_ref();
    let reader = open(path)?;
    let mut lines = reader.lines().enumerate();

    let (lineno, header) = match lines.next() {
        Some((i, l)) => (i + 1, l.map_err(|e| Error::io(path, e))?),
        None => return Err(parse_err(path, 1, "empty file")),
    };
    let tokens: Vec<String> = header.split_whitespace().map(str::to_ascii_lowercase).collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(parse_err(path, lineno, "missing %%MatrixMarket matrix header"));
    }
    if tokens[2] != "coordinate" {
        return Err(parse_err(path, lineno, format!("unsupported format `{}`", tokens[2])));
    }
    let pattern = match tokens[3].as_str() {
        "real" | "integer" | "double" => false,
        "pattern" => true,
        other => return Err(Error::UnsupportedField(other.to_string())),
    };
    let symmetric = match tokens[4].as_str() {
        "general" => false,
        "symmetric" => true,
        other => return Err(Error::UnsupportedField(other.to_string())),
    };

    let mut size: Option<(usize, usize)> = None;
    let mut declared = 0usize;
    let mut entries = Vec::new();
    for (i, line) in lines {
        let lineno = i + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        let Some((rows, _)) = size else {
            if fields.len() != 3 {
                return Err(parse_err(path, lineno, "expected `rows cols nnz`"));
            }
            let nums: Vec<usize> = fields
                .iter()
                .map(|f| f.parse().map_err(|_| parse_err(path, lineno, format!("bad integer `{f}`"))))
                .collect::<Result<_>>()?;
            if nums[0] != nums[1] {
                return Err(parse_err(path, lineno, "adjacency matrix must be square"));
            }
            if nums[0] == 0 {
                return Err(parse_err(path, lineno, "matrix has no rows"));
            }
            size = Some((nums[0], nums[1]));
            declared = nums[2];
            entries.reserve(declared * if symmetric { 2 } else { 1 });
            continue;
        };
        let expected_fields = if pattern { 2 } else { 3 };
        if fields.len() < expected_fields {
            return Err(parse_err(path, lineno, format!("expected {expected_fields} fields")));
        }
        let index = |f: &str| -> Result<usize> {
            let v: usize = f
                .parse()
                .map_err(|_| parse_err(path, lineno, format!("bad index `{f}`")))?;
            if v == 0 || v > rows {
                return Err(parse_err(path, lineno, format!("index {v} outside 1..={rows}")));
            }
            Ok(v - 1)
        };
        let r = index(fields[0])?;
        let c = index(fields[1])?;
        let value = if pattern {
            1.0
        } else {
            fields[2]
                .parse::<f64>()
                .map_err(|_| parse_err(path, lineno, format!("bad value `{}`", fields[2])))?
        };
        let w = match mode {
            WeightMode::AsIs => {
                if value < 0.0 {
                    return Err(Error::NegativeWeight { i: r, j: c, weight: value });
                }
                value
            }
            WeightMode::Absolute => value.abs(),
            WeightMode::Pattern => 1.0,
        };
        entries.push((r, c, w));
        if symmetric && r != c {
            entries.push((c, r, w));
        }
        if entries.len() > 2 * declared {
            return Err(parse_err(path, lineno, "more entries than declared"));
        }
    }
    let Some((n, _)) = size else {
        return Err(parse_err(path, 1, "missing size line"));
    };
    let stored = if symmetric {
        entries.iter().filter(|&&(r, c, _)| r >= c).count()
    } else {
        entries.len()
    };
    if stored != declared {
        return Err(parse_err(
            path,
            0,
            format!("header declares {declared} entries, found {stored}"),
        ));
    }
    WeightedGraph::new(n, &entries, !symmetric)
}

/// Writes all stored entries in `coordinate real general` form.
pub fn write_matrix_market(g: &WeightedGraph, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = create(path)?;
    let io = |e| Error::io(path, e);
    writeln!(w, "%%MatrixMarket matrix coordinate real general").map_err(io)?;
    writeln!(w, "{} {} {}", g.n(), g.n(), g.num_entries()).map_err(io)?;
    for (i, j, v) in g.entries() {
        writeln!(w, "{} {} {}", i + 1, j + 1, fmt_f64(v)).map_err(io)?;
    }
    w.flush().map_err(io)
}

/// Shortest representation that parses back to the same `f64`.
fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

struct EdgeListContents {
    n_header: Option<usize>,
    directed_header: Option<bool>,
    edges: Vec<(usize, usize, f64)>,
}

fn parse_edge_list(path: &Path) -> Result<EdgeListContents> {
    let reader = open(path)?;
    let mut out = EdgeListContents {
        n_header: None,
        directed_header: None,
        edges: Vec::new(),
    };
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(comment) = trimmed.strip_prefix('#') {
            let comment = comment.trim();
            if let Some(v) = comment.strip_prefix("n=") {
                let n = v
                    .trim()
                    .parse()
                    .map_err(|_| parse_err(path, lineno, format!("bad vertex count `{v}`")))?;
                out.n_header = Some(n);
            } else if let Some(v) = comment.strip_prefix("directed=") {
                let d = v
                    .trim()
                    .parse()
                    .map_err(|_| parse_err(path, lineno, format!("bad directed flag `{v}`")))?;
                out.directed_header = Some(d);
            }
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if fields.len() < 2 || fields.len() > 3 {
            return Err(parse_err(path, lineno, "expected `i j [w]`"));
        }
        let idx = |f: &str| -> Result<usize> {
            f.parse()
                .map_err(|_| parse_err(path, lineno, format!("bad vertex index `{f}`")))
        };
        let w = match fields.get(2) {
            Some(f) => {
                let w: f64 = f
                    .parse()
                    .map_err(|_| parse_err(path, lineno, format!("bad weight `{f}`")))?;
                if !(w >= 0.0) || !w.is_finite() {
                    return Err(parse_err(path, lineno, format!("weight {w} must be nonnegative")));
                }
                w
            }
            None => 1.0,
        };
        out.edges.push((idx(fields[0])?, idx(fields[1])?, w));
    }
    if let Some(n) = out.n_header {
        if let Some(&(i, j, _)) = out.edges.iter().find(|&&(i, j, _)| i >= n || j >= n) {
            return Err(parse_err(
                path,
                0,
                format!("edge ({i}, {j}) exceeds declared vertex count {n}"),
            ));
        }
    }
    Ok(out)
}

impl EdgeListContents {
    fn vertex_count(&self, path: &Path) -> Result<usize> {
        match self.n_header {
            Some(n) if n > 0 => Ok(n),
            Some(_) => Err(parse_err(path, 0, "declared vertex count must be positive")),
            None => self
                .edges
                .iter()
                .map(|&(i, j, _)| i.max(j) + 1)
                .max()
                .ok_or_else(|| parse_err(path, 0, "no edges and no `#n=` header")),
        }
    }
}

/// Reads whitespace-separated `i j [w]` lines (missing weight = 1).
///
/// The vertex count is `max index + 1` unless a `#n=<N>` line declares it.
pub fn load_edge_list(path: impl AsRef<Path>, directed: bool) -> Result<WeightedGraph> {
    let path = path.as_ref();
    let contents = parse_edge_list(path)?;
    let n = contents.vertex_count(path)?;
    WeightedGraph::new(n, &contents.edges, directed)
}

/// Writes an edge list with `#n=` and `#directed=` headers. Every stored
/// entry is written, so undirected graphs list both orientations.
pub fn write_edge_list(g: &WeightedGraph, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = create(path)?;
    let io = |e| Error::io(path, e);
    writeln!(w, "#n={}", g.n()).map_err(io)?;
    writeln!(w, "#directed={}", g.is_directed()).map_err(io)?;
    for (i, j, v) in g.entries() {
        writeln!(w, "{i}\t{j}\t{}", fmt_f64(v)).map_err(io)?;
    }
    w.flush().map_err(io)
}

pub fn snapshot_file_name(t: usize) -> String {
    format!("snapshot_{t:03}.tsv")
}

fn snapshot_index(name: &str) -> Option<usize> {
    let digits = name.strip_prefix("snapshot_")?.strip_suffix(".tsv")?;
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    digits.parse().ok()
}

/// Loads `snapshot_000.tsv`, `snapshot_001.tsv`, ... ordered by index.
///
/// Snapshots are directed unless the file carries `#directed=false`.
pub fn load_temporal_dir(path: impl AsRef<Path>) -> Result<TemporalGraph> {
    let dir = path.as_ref();
    let mut files: Vec<(usize, PathBuf)> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|entry| {
            let entry = entry.ok()?;
            let name = entry.file_name();
            snapshot_index(name.to_str()?).map(|t| (t, entry.path()))
        })
        .collect();
    if files.is_empty() {
        return Err(Error::EmptyDirectory(dir.to_path_buf()));
    }
    files.sort();

    let mut snapshots = Vec::with_capacity(files.len());
    let mut expected: Option<usize> = None;
    for (index, (_, file)) in files.iter().enumerate() {
        let contents = parse_edge_list(file)?;
        let n = contents.vertex_count(file)?;
        match expected {
            None => expected = Some(n),
            Some(e) if e != n => {
                return Err(Error::InconsistentVertexCount {
                    index,
                    expected: e,
                    found: n,
                })
            }
            _ => {}
        }
        let directed = contents.directed_header.unwrap_or(true);
        snapshots.push(WeightedGraph::new(n, &contents.edges, directed)?);
    }
    let times = files.iter().map(|&(t, _)| t as i64).collect();
    TemporalGraph::new(snapshots)?.with_times(times)
}

/// Writes one `snapshot_%03d.tsv` per snapshot, creating the directory.
pub fn write_temporal_dir(tg: &TemporalGraph, path: impl AsRef<Path>) -> Result<()> {
    let dir = path.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for (t, g) in tg.snapshots().iter().enumerate() {
        write_edge_list(g, dir.join(snapshot_file_name(t)))?;
    }
    Ok(())
}

/// A contact log aggregated into one undirected snapshot per day.
#[derive(Debug, Clone)]
pub struct ContactData {
    pub graph: TemporalGraph,
    /// Original ID of each vertex, ascending.
    pub ids: Vec<u64>,
    /// Class label of each vertex.
    pub classes: Vec<String>,
}

impl ContactData {
    pub fn index_of(&self, id: u64) -> Option<usize> {
        self.ids.binary_search(&id).ok()
    }

    /// Distinct class labels in sorted order and each vertex's class index.
    pub fn class_indices(&self) -> (Vec<String>, Vec<usize>) {
        let mut names: Vec<String> = self.classes.clone();
        names.sort();
        names.dedup();
        let labels = self
            .classes
            .iter()
            .map(|c| names.binary_search(c).unwrap_or_default())
            .collect();
        (names, labels)
    }
}

struct Contact {
    t: i64,
    i: u64,
    j: u64,
}

fn read_contacts(path: &Path) -> Result<(Vec<Contact>, BTreeMap<u64, String>)> {
    let reader = open(path)?;
    let mut contacts = Vec::new();
    let mut classes: BTreeMap<u64, String> = BTreeMap::new();
    for (k, line) in reader.lines().enumerate() {
        let lineno = k + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if fields.len() != 5 {
            return Err(parse_err(path, lineno, "expected `t i j Ci Cj`"));
        }
        let t: i64 = fields[0]
            .parse()
            .map_err(|_| parse_err(path, lineno, format!("bad timestamp `{}`", fields[0])))?;
        let id = |f: &str| -> Result<u64> {
            f.parse()
                .map_err(|_| parse_err(path, lineno, format!("bad student id `{f}`")))
        };
        let (i, j) = (id(fields[1])?, id(fields[2])?);
        for (who, class) in [(i, fields[3]), (j, fields[4])] {
            match classes.get(&who) {
                Some(c) if c != class => {
                    return Err(parse_err(
                        path,
                        lineno,
                        format!("student {who} listed in classes {c} and {class}"),
                    ))
                }
                Some(_) => {}
                None => {
                    classes.insert(who, class.to_string());
                }
            }
        }
        contacts.push(Contact { t, i, j });
    }
    Ok((contacts, classes))
}

/// Aggregates a `t i j Ci Cj` contact log into one undirected snapshot per
/// half-open `[start, end)` timestamp range.
///
/// Edge weights count contact events. Every student in the file becomes a
/// vertex, including students without contacts in a given day. Contacts
/// outside all ranges are ignored.
pub fn load_contact_data(path: impl AsRef<Path>, day_boundaries: &[(i64, i64)]) -> Result<ContactData> {
    let path = path.as_ref();
    if day_boundaries.is_empty() {
        return Err(Error::InvalidArgument("at least one day range is required".into()));
    }
    if let Some(&(s, e)) = day_boundaries.iter().find(|&&(s, e)| s >= e) {
        return Err(Error::InvalidArgument(format!("empty day range [{s}, {e})")));
    }
    let (contacts, classes) = read_contacts(path)?;
    let ids: Vec<u64> = classes.keys().copied().collect();
    if ids.is_empty() {
        return Err(parse_err(path, 0, "no contacts"));
    }
    let index: HashMap<u64, usize> = ids.iter().enumerate().map(|(k, &id)| (id, k)).collect();
    let n = ids.len();

    let mut per_day: Vec<Vec<(usize, usize, f64)>> = vec![Vec::new(); day_boundaries.len()];
    for c in &contacts {
        if c.i == c.j {
            continue;
        }
        let Some(day) = day_boundaries.iter().position(|&(s, e)| c.t >= s && c.t < e) else {
            continue;
        };
        let (a, b) = (index[&c.i], index[&c.j]);
        per_day[day].push((a.min(b), a.max(b), 1.0));
    }
    let mut snapshots = Vec::with_capacity(per_day.len());
    for (day, edges) in per_day.iter().enumerate() {
        if edges.is_empty() {
            log::warn!("{}: day {day} has no contacts", path.display());
        }
        snapshots.push(WeightedGraph::new(n, edges, false)?);
    }
    let times = day_boundaries.iter().map(|&(s, _)| s).collect();
    Ok(ContactData {
        graph: TemporalGraph::new(snapshots)?.with_times(times)?,
        ids,
        classes: classes.into_values().collect(),
    })
}

/// Splits the timestamps of a contact log into ranges separated by gaps
/// longer than `min_gap` (e.g. nights).
pub fn infer_day_boundaries(path: impl AsRef<Path>, min_gap: i64) -> Result<Vec<(i64, i64)>> {
    let path = path.as_ref();
    let (contacts, _) = read_contacts(path)?;
    let mut times: Vec<i64> = contacts.iter().map(|c| c.t).collect();
    times.sort_unstable();
    times.dedup();
    let Some(&first) = times.first() else {
        return Err(parse_err(path, 0, "no contacts"));
    };
    let mut ranges = Vec::new();
    let mut start = first;
    for w in times.windows(2) {
        if w[1] - w[0] > min_gap {
            ranges.push((start, w[0] + 1));
            start = w[1];
        }
    }
    ranges.push((start, times[times.len() - 1] + 1));
    Ok(ranges)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &Path, name: &str, contents: &str) -> PathBuf {
        let p = dir.join(name);
        fs::write(&p, contents).unwrap();
        p
    }

    #[test]
    fn matrix_market_identity() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            dir.path(),
            "id.mtx",
            "%%MatrixMarket matrix coordinate real general\n% comment\n2 2 2\n1 1 1.0\n2 2 1.0\n",
        );
        let g = load_matrix_market(&p).unwrap();
        assert_eq!(g.n(), 2);
        assert_eq!(g.entries().collect::<Vec<_>>(), vec![(0, 0, 1.0), (1, 1, 1.0)]);
        assert!(g.is_directed());
    }

    #[test]
    fn matrix_market_symmetric_pattern_expands() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            dir.path(),
            "s.mtx",
            "%%MatrixMarket matrix coordinate pattern symmetric\n3 3 2\n2 1\n3 3\n",
        );
        let g = load_matrix_market(&p).unwrap();
        assert!(!g.is_directed());
        assert_eq!(g.num_entries(), 3);
        assert_eq!(g.weight(0, 1), 1.0);
        assert_eq!(g.weight(1, 0), 1.0);
    }

    #[test]
    fn matrix_market_errors() {
        let dir = tempfile::tempdir().unwrap();
        let zero = write(
            dir.path(),
            "z.mtx",
            "%%MatrixMarket matrix coordinate real general\n2 2 1\n0 1 1.0\n",
        );
        match load_matrix_market(&zero) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        let complex = write(
            dir.path(),
            "c.mtx",
            "%%MatrixMarket matrix coordinate complex general\n1 1 1\n1 1 1.0 0.0\n",
        );
        assert!(matches!(load_matrix_market(&complex), Err(Error::UnsupportedField(_))));
        let short = write(
            dir.path(),
            "short.mtx",
            "%%MatrixMarket matrix coordinate real general\n2 2 3\n1 1 1.0\n",
        );
        assert!(matches!(load_matrix_market(&short), Err(Error::Parse { .. })));
        let neg = write(
            dir.path(),
            "neg.mtx",
            "%%MatrixMarket matrix coordinate real general\n2 2 1\n1 2 -3.0\n",
        );
        assert!(matches!(load_matrix_market(&neg), Err(Error::NegativeWeight { .. })));
        let g = load_matrix_market_with(&neg, WeightMode::Absolute).unwrap();
        assert_eq!(g.weight(0, 1), 3.0);
        assert!(matches!(
            load_matrix_market(dir.path().join("missing.mtx")),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn edge_lists() {
        let dir = tempfile::tempdir().unwrap();
        let cycle = write(dir.path(), "a.tsv", "0 1\n1 0\n");
        let g = load_edge_list(&cycle, true).unwrap();
        assert_eq!(g.entries().collect::<Vec<_>>(), vec![(0, 1, 1.0), (1, 0, 1.0)]);

        let weighted = write(dir.path(), "b.tsv", "0 1 0.01\n");
        let g = load_edge_list(&weighted, true).unwrap();
        assert_eq!(g.entries().collect::<Vec<_>>(), vec![(0, 1, 0.01)]);

        let header = write(dir.path(), "c.tsv", "#n=5\n0 1\n");
        let g = load_edge_list(&header, true).unwrap();
        assert_eq!(g.n(), 5);
        assert_eq!(g.out_degrees().values[2..], [0.0, 0.0, 0.0]);

        let bad = write(dir.path(), "d.tsv", "0 1\n0 x\n");
        assert!(matches!(load_edge_list(&bad, true), Err(Error::Parse { line: 2, .. })));
        let too_small = write(dir.path(), "e.tsv", "#n=2\n0 3\n");
        assert!(matches!(load_edge_list(&too_small, true), Err(Error::Parse { .. })));
    }

    #[test]
    fn temporal_dirs() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(load_temporal_dir(dir.path()), Err(Error::EmptyDirectory(_))));
        write(dir.path(), "snapshot_001.tsv", "#n=3\n1 2\n");
        write(dir.path(), "snapshot_000.tsv", "#n=3\n0 1\n");
        write(dir.path(), "notes.txt", "ignored");
        let tg = load_temporal_dir(dir.path()).unwrap();
        assert_eq!(tg.len(), 2);
        assert_eq!(tg.snapshot(0).weight(0, 1), 1.0);
        assert_eq!(tg.snapshot(1).weight(1, 2), 1.0);

        write(dir.path(), "snapshot_002.tsv", "#n=4\n0 1\n");
        assert!(matches!(
            load_temporal_dir(dir.path()),
            Err(Error::InconsistentVertexCount { index: 2, .. })
        ));
    }

    #[test]
    fn contact_aggregation() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            dir.path(),
            "contacts.txt",
            "10 7 3 A B\n20 7 3 A B\n30 3 7 B A\n150 3 9 B A\n",
        );
        let data = load_contact_data(&p, &[(0, 100), (100, 200)]).unwrap();
        assert_eq!(data.ids, vec![3, 7, 9]);
        assert_eq!(data.classes, vec!["B", "A", "A"]);
        let d0 = data.graph.snapshot(0);
        assert_eq!(d0.weight(0, 1), 3.0);
        assert_eq!(d0.weight(1, 0), 3.0);
        assert_eq!(d0.weight(0, 2), 0.0);
        assert_eq!(data.graph.snapshot(1).weight(0, 2), 1.0);

        let later = load_contact_data(&p, &[(0, 5), (5, 1000)]).unwrap();
        assert_eq!(later.graph.snapshot(0).num_entries(), 0);
        assert!(later.graph.snapshot(1).num_entries() > 0);

        assert_eq!(infer_day_boundaries(&p, 50).unwrap(), vec![(10, 31), (150, 151)]);
    }
}
