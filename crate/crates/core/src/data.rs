//! Instance generators and preference-matrix file formats.
//!
//! Three text formats share one layout: a header line, then `n` rows of `n`
//! entries. Entries are separated by commas and/or whitespace; blank lines
//! and lines starting with `#` are skipped.
//!
//! * raw: header `n,k_min,k_max`, entries are nonnegative utilities.
//! * rank: header `rank n k_min k_max`, row `i` ranks the other agents
//!   `1..n-1` (1 = best); rank `r` becomes value `n - r`.
//! * count: header `count n k_min k_max`, nonnegative counts used as
//!   utilities.
//!
//! Diagonal entries are ignored and forced to 0.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::model::Game;

/// Random-similar: agent `i` has public value `i + 1`; each other agent
/// values it at that plus independent `Normal(0, n/5)` noise, redrawn until
/// nonnegative.
pub fn gen_rsim<R: Rng + ?Sized>(n: usize, k_min: usize, k_max: usize, rng: &mut R) -> Result<Game> {
    if n < 2 {
        return Err(Error::InvalidBounds { n, k_min, k_max });
    }
    let noise = Normal::new(0.0, n as f64 / 5.0).expect("positive deviation");
    let mut flat = vec![0.0; n * n];
    for j in 0..n {
        for i in (0..n).filter(|&i| i != j) {
            let public = (i + 1) as f64;
            flat[j * n + i] = loop {
                let v = public + noise.sample(rng);
                if v >= 0.0 {
                    break v;
                }
            };
        }
    }
    Game::from_flat(n, flat, k_min, k_max)
}

/// Random-scattered: each agent splits a total of 100 among the others at
/// `n - 2` uniform cut points, handing the pieces out in index order.
pub fn gen_rsca<R: Rng + ?Sized>(n: usize, k_min: usize, k_max: usize, rng: &mut R) -> Result<Game> {
    if n < 3 {
        return Err(Error::InvalidBounds { n, k_min, k_max });
    }
    let mut flat = vec![0.0; n * n];
    let mut cuts = Vec::with_capacity(n);
    for j in 0..n {
        cuts.clear();
        cuts.push(0.0);
        cuts.extend((0..n - 2).map(|_| rng.random_range(0.0..=100.0)));
        cuts.push(100.0);
        cuts.sort_by(f64::total_cmp);
        let others = (0..n).filter(|&i| i != j);
        for (i, w) in others.zip(cuts.windows(2)) {
            flat[j * n + i] = w[1] - w[0];
        }
    }
    Game::from_flat(n, flat, k_min, k_max)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MatrixFormat {
    Raw,
    Rank,
    /// Rank matrix whose tied ranks are replaced by the mean of the
    /// positions they span.
    RankAveraged,
    Count,
}

struct Parsed {
    n: usize,
    k_min: usize,
    k_max: usize,
    /// Row-major tokens with their 1-based source line.
    rows: Vec<(usize, Vec<String>)>,
}

fn tokens(line: &str) -> Vec<String> {
    line.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(str::to_string)
        .collect()
}

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        msg: msg.into(),
    }
}

fn detect(text: &str) -> MatrixFormat {
    let first = content_lines(text).next().map(|(_, l)| tokens(l)).unwrap_or_default();
    match first.first().map(|t| t.to_ascii_lowercase()) {
        Some(t) if t == "rank" => MatrixFormat::Rank,
        Some(t) if t == "count" => MatrixFormat::Count,
        _ => MatrixFormat::Raw,
    }
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse(text: &str, path: &Path, keyword: Option<&str>) -> Result<Parsed> {
    let mut lines = content_lines(text);
    let (hline, header) = lines.next().ok_or_else(|| parse_err(path, 0, "empty file"))?;
    let mut header = tokens(header);
    if let Some(kw) = keyword {
        if header.first().map(|t| t.to_ascii_lowercase()) != Some(kw.to_string()) {
            return Err(parse_err(path, hline, format!("expected header `{kw} n k_min k_max`")));
        }
        header.remove(0);
    }
    if header.len() != 3 {
        return Err(parse_err(path, hline, "header needs n, k_min and k_max"));
    }
    let nums: Vec<usize> = header
        .iter()
        .map(|t| t.parse().map_err(|_| parse_err(path, hline, format!("bad header value `{t}`"))))
        .collect::<Result<_>>()?;
    let (n, k_min, k_max) = (nums[0], nums[1], nums[2]);
    let rows: Vec<(usize, Vec<String>)> = lines.map(|(no, l)| (no, tokens(l))).collect();
    if rows.len() != n {
        return Err(parse_err(path, hline, format!("expected {n} rows, found {}", rows.len())));
    }
    for (i, (no, row)) in rows.iter().enumerate() {
        if row.len() != n {
            return Err(parse_err(path, *no, format!("row {i} has {} entries, expected {n}", row.len())));
        }
    }
    Ok(Parsed { n, k_min, k_max, rows })
}

fn numeric(parsed: &Parsed, path: &Path, what: &str) -> Result<Vec<f64>> {
    let n = parsed.n;
    let mut flat = vec![0.0; n * n];
    for (i, (no, row)) in parsed.rows.iter().enumerate() {
        for (j, t) in row.iter().enumerate() {
            if i == j {
                continue;
            }
            let v: f64 = t
                .parse()
                .map_err(|_| parse_err(path, *no, format!("row {i}: bad {what} `{t}`")))?;
            if !v.is_finite() || v < 0.0 {
                return Err(parse_err(path, *no, format!("row {i}: negative or non-finite {what} `{t}`")));
            }
            flat[i * n + j] = v;
        }
    }
    Ok(flat)
}

fn rank_values(parsed: &Parsed, path: &Path, average_ties: bool) -> Result<Vec<f64>> {
    let n = parsed.n;
    let mut flat = vec![0.0; n * n];
    for (i, (no, row)) in parsed.rows.iter().enumerate() {
        let mut ranks = Vec::with_capacity(n.saturating_sub(1));
        for (j, t) in row.iter().enumerate() {
            if i == j {
                continue;
            }
            let r: f64 = t
                .parse()
                .map_err(|_| parse_err(path, *no, format!("row {i}: bad rank `{t}`")))?;
            if !r.is_finite() || r < 1.0 {
                return Err(parse_err(path, *no, format!("row {i}: rank `{t}` below 1")));
            }
            ranks.push((j, r));
        }
        if average_ties {
            ranks.sort_by(|a, b| a.1.total_cmp(&b.1));
            let mut start = 0;
            while start < ranks.len() {
                let mut end = start + 1;
                while end < ranks.len() && ranks[end].1 == ranks[start].1 {
                    end += 1;
                }
                let avg = (start + 1 + end) as f64 / 2.0;
                for (j, _) in &ranks[start..end] {
                    flat[i * n + j] = n as f64 - avg;
                }
                start = end;
            }
        } else {
            let mut seen = vec![false; n];
            for &(j, r) in &ranks {
                let ok = r.fract() == 0.0 && (r as usize) < n && !seen[r as usize];
                if !ok {
                    return Err(parse_err(
                        path,
                        *no,
                        format!("row {i}: ranks are not a permutation of 1..{}", n - 1),
                    ));
                }
                seen[r as usize] = true;
                flat[i * n + j] = n as f64 - r;
            }
        }
    }
    Ok(flat)
}

/// Parses matrix text in the given format. `bounds` overrides the header's
/// team-size bounds. `path` only labels errors.
pub fn parse_matrix(text: &str, path: &Path, format: MatrixFormat, bounds: Option<(usize, usize)>) -> Result<Game> {
    let (parsed, flat) = match format {
        MatrixFormat::Raw => {
            let p = parse(text, path, None)?;
            let flat = numeric(&p, path, "utility")?;
            (p, flat)
        }
        MatrixFormat::Count => {
            let p = parse(text, path, Some("count"))?;
            let flat = numeric(&p, path, "count")?;
            (p, flat)
        }
        MatrixFormat::Rank | MatrixFormat::RankAveraged => {
            let p = parse(text, path, Some("rank"))?;
            let flat = rank_values(&p, path, format == MatrixFormat::RankAveraged)?;
            (p, flat)
        }
    };
    let (k_min, k_max) = bounds.unwrap_or((parsed.k_min, parsed.k_max));
    Game::from_flat(parsed.n, flat, k_min, k_max)
}

fn read(path: &Path) -> Result<String> {
    Ok(fs::read_to_string(path)?)
}

/// Loads any of the three formats, detected from the header.
pub fn load_game(path: impl AsRef<Path>) -> Result<Game> {
    let path = path.as_ref();
    let text = read(path)?;
    parse_matrix(&text, path, detect(&text), None)
}

pub fn load_raw_matrix(path: impl AsRef<Path>) -> Result<Game> {
    let path = path.as_ref();
    parse_matrix(&read(path)?, path, MatrixFormat::Raw, None)
}

/// Rank matrix; rows must rank the other agents as a permutation.
pub fn load_rank_matrix(path: impl AsRef<Path>, k_min: usize, k_max: usize) -> Result<Game> {
    let path = path.as_ref();
    parse_matrix(&read(path)?, path, MatrixFormat::Rank, Some((k_min, k_max)))
}

/// Rank matrix allowing ties, which receive their average position.
pub fn load_rank_matrix_averaged(path: impl AsRef<Path>, k_min: usize, k_max: usize) -> Result<Game> {
    let path = path.as_ref();
    parse_matrix(&read(path)?, path, MatrixFormat::RankAveraged, Some((k_min, k_max)))
}

/// Count matrix. All-zero rows are accepted; see
/// [`Game::normalize_lenient`] to find them.
pub fn load_count_matrix(path: impl AsRef<Path>, k_min: usize, k_max: usize) -> Result<Game> {
    let path = path.as_ref();
    parse_matrix(&read(path)?, path, MatrixFormat::Count, Some((k_min, k_max)))
}

/// Raw-format text for a game. Values round-trip exactly.
pub fn to_raw_string(game: &Game) -> String {
    let mut out = format!("{},{},{}\n", game.n(), game.k_min(), game.k_max());
    for row in game.rows() {
        let line: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
        let _ = writeln!(out, "{}", line.join(","));
    }
    out
}

pub fn write_raw_matrix(game: &Game, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, to_raw_string(game))?;
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DatasetKind {
    RSim,
    RSca,
    Rank,
    RankAveraged,
    Count,
    Raw,
}

impl std::str::FromStr for DatasetKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "r_sim" | "rsim" => Ok(Self::RSim),
            "r_sca" | "rsca" => Ok(Self::RSca),
            "rank" | "rank_matrix" => Ok(Self::Rank),
            "rank_averaged" | "rank_matrix_averaged" => Ok(Self::RankAveraged),
            "count" | "count_matrix" => Ok(Self::Count),
            "raw" | "raw_matrix" => Ok(Self::Raw),
            other => Err(Error::Config(format!("unknown dataset kind `{other}`"))),
        }
    }
}

impl DatasetKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::RSim => "r_sim",
            Self::RSca => "r_sca",
            Self::Rank => "rank_matrix",
            Self::RankAveraged => "rank_matrix_averaged",
            Self::Count => "count_matrix",
            Self::Raw => "raw_matrix",
        }
    }

    pub fn is_generator(self) -> bool {
        matches!(self, Self::RSim | Self::RSca)
    }
}

/// Where instances come from: a generator with its size parameters, or a
/// file (whose bounds may be overridden).
#[derive(Clone, Debug, PartialEq)]
pub struct DatasetSpec {
    pub kind: DatasetKind,
    pub n: usize,
    pub k_min: usize,
    pub k_max: usize,
    pub source: Option<PathBuf>,
}

impl DatasetSpec {
    pub fn generator(kind: DatasetKind, n: usize, k_min: usize, k_max: usize) -> Self {
        Self {
            kind,
            n,
            k_min,
            k_max,
            source: None,
        }
    }

    /// Builds one instance. Generators draw from `rng`; files ignore it.
    pub fn instance<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Game> {
        let bounds = Some((self.k_min, self.k_max));
        let file = || {
            self.source
                .as_ref()
                .ok_or_else(|| Error::Config(format!("dataset `{}` needs a source path", self.kind.name())))
        };
        match self.kind {
            DatasetKind::RSim => gen_rsim(self.n, self.k_min, self.k_max, rng),
            DatasetKind::RSca => gen_rsca(self.n, self.k_min, self.k_max, rng),
            DatasetKind::Rank => {
                let p = file()?;
                parse_matrix(&read(p)?, p, MatrixFormat::Rank, bounds)
            }
            DatasetKind::RankAveraged => {
                let p = file()?;
                parse_matrix(&read(p)?, p, MatrixFormat::RankAveraged, bounds)
            }
            DatasetKind::Count => {
                let p = file()?;
                parse_matrix(&read(p)?, p, MatrixFormat::Count, bounds)
            }
            DatasetKind::Raw => {
                let p = file()?;
                parse_matrix(&read(p)?, p, MatrixFormat::Raw, bounds)
            }
        }
    }
}
