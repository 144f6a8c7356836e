//! Slow, obviously-correct reference implementations. Nothing here calls
//! into the library under test.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::PathBuf;

use unicode_normalization::UnicodeNormalization;

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

pub fn data(name: &str) -> PathBuf {
    data_dir().join(name)
}

/// Quote-aware CSV split; rows of unquoted fields.
pub fn read_csv(text: &str) -> Vec<Vec<String>> {
    let mut rows = Vec::new();
    let mut row = Vec::new();
    let mut field = String::new();
    let mut quoted = false;
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        if quoted {
            match c {
                '"' if chars.peek() == Some(&'"') => {
                    chars.next();
                    field.push('"');
                }
                '"' => quoted = false,
                _ => field.push(c),
            }
            continue;
        }
        match c {
            '"' => quoted = true,
            ',' => row.push(std::mem::take(&mut field)),
            '\r' => {}
            '\n' => {
                row.push(std::mem::take(&mut field));
                rows.push(std::mem::take(&mut row));
            }
            _ => field.push(c),
        }
    }
    if !field.is_empty() || !row.is_empty() {
        row.push(field);
        rows.push(row);
    }
    rows
}

pub struct Row {
    pub id: String,
    pub source: String,
    pub year: i32,
    pub class_a: String,
    pub class_b: String,
    pub keywords: Vec<String>,
}

pub fn fixture_rows() -> Vec<Row> {
    let text = std::fs::read_to_string(data("records.csv")).unwrap();
    read_csv(&text)
        .into_iter()
        .skip(1)
        .map(|f| Row {
            id: f[0].clone(),
            source: f[1].clone(),
            year: f[2].parse().unwrap(),
            class_a: f[4].clone(),
            class_b: f[5].clone(),
            keywords: f[6]
                .split(';')
                .map(|k| k.trim().to_string())
                .filter(|k| !k.is_empty())
                .collect(),
        })
        .collect()
}

pub fn key(raw: &str) -> String {
    let folded: String = raw.nfc().collect::<String>().to_lowercase();
    folded.split_whitespace().collect::<Vec<_>>().join(" ")
}

pub fn fixture_mapping() -> HashMap<String, String> {
    let text = std::fs::read_to_string(data("mapping.txt")).unwrap();
    let mut map = HashMap::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (raw, canonical) = line.split_once("->").unwrap();
        map.insert(key(raw), canonical.trim().to_string());
    }
    map
}

pub fn scheme_labels(name: &str) -> Vec<String> {
    std::fs::read_to_string(data(name))
        .unwrap()
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(String::from)
        .collect()
}

/// Descriptor list per record: mapped if possible, else the folded key;
/// duplicates within a record removed.
pub fn descriptor_sets(rows: &[Row]) -> Vec<Vec<String>> {
    let map = fixture_mapping();
    rows.iter()
        .map(|r| {
            let mut out: Vec<String> = Vec::new();
            for k in &r.keywords {
                let folded = key(k);
                let d = map.get(&folded).cloned().unwrap_or(folded);
                if !out.contains(&d) {
                    out.push(d);
                }
            }
            out
        })
        .collect()
}

pub fn frequencies(sets: &[Vec<String>]) -> BTreeMap<String, usize> {
    let mut f = BTreeMap::new();
    for s in sets {
        for d in s {
            *f.entry(d.clone()).or_insert(0) += 1;
        }
    }
    f
}

/// Co-occurrence counts keyed by the ordered label pair.
pub fn pair_counts(sets: &[Vec<String>]) -> BTreeMap<(String, String), usize> {
    let mut c = BTreeMap::new();
    for s in sets {
        for a in s {
            for b in s {
                if a < b {
                    *c.entry((a.clone(), b.clone())).or_insert(0) += 1;
                }
            }
        }
    }
    c
}

pub fn tally<S: AsRef<str>>(values: impl IntoIterator<Item = S>) -> BTreeMap<String, usize> {
    let mut t = BTreeMap::new();
    for v in values {
        *t.entry(v.as_ref().to_string()).or_insert(0) += 1;
    }
    t
}

/// All-pairs shortest paths; `f64::INFINITY` when unreachable.
pub fn floyd_warshall(n: usize, edges: &[(usize, usize, f64)]) -> Vec<Vec<f64>> {
    let mut d = vec![vec![f64::INFINITY; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0.0;
    }
    for &(a, b, w) in edges {
        d[a][b] = d[a][b].min(w);
        d[b][a] = d[b][a].min(w);
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    d
}

/// Every set partition of `0..n` as a restricted growth string.
pub fn all_partitions(n: usize) -> Vec<Vec<usize>> {
    fn grow(prefix: &mut Vec<usize>, max: usize, n: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        for c in 0..=max + 1 {
            prefix.push(c);
            grow(prefix, max.max(c), n, out);
            prefix.pop();
        }
    }
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    grow(&mut vec![0], 0, n, &mut out);
    out
}

/// `Q = 1/2m * sum_ij (A_ij - gamma k_i k_j / 2m) [c_i == c_j]`.
pub fn modularity(n: usize, edges: &[(usize, usize, f64)], assign: &[usize], gamma: f64) -> f64 {
    let mut a = vec![vec![0.0; n]; n];
    for &(i, j, w) in edges {
        a[i][j] += w;
        a[j][i] += w;
    }
    let k: Vec<f64> = a.iter().map(|r| r.iter().sum()).collect();
    let two_m: f64 = k.iter().sum();
    if two_m == 0.0 {
        return 0.0;
    }
    let mut q = 0.0;
    for i in 0..n {
        for j in 0..n {
            if assign[i] == assign[j] {
                q += a[i][j] - gamma * k[i] * k[j] / two_m;
            }
        }
    }
    q / two_m
}

/// Best modularity over all partitions.
pub fn best_modularity(n: usize, edges: &[(usize, usize, f64)], gamma: f64) -> (f64, Vec<usize>) {
    all_partitions(n)
        .into_iter()
        .map(|p| (modularity(n, edges, &p, gamma), p))
        .fold((f64::NEG_INFINITY, vec![]), |best, cur| {
            if cur.0 > best.0 {
                cur
            } else {
                best
            }
        })
}

/// Stress with springs `1/d^2` and targets `scale * d`, summed over pairs.
pub fn stress(pos: &[[f64; 2]], d: &[Vec<f64>], scale: f64) -> f64 {
    let mut e = 0.0;
    for i in 0..pos.len() {
        for j in i + 1..pos.len() {
            let r = ((pos[i][0] - pos[j][0]).powi(2) + (pos[i][1] - pos[j][1]).powi(2)).sqrt();
            e += (r - scale * d[i][j]).powi(2) / (d[i][j] * d[i][j]);
        }
    }
    e
}

/// Plain gradient descent with numeric gradients and backtracking, started
/// from several deterministic spreads; returns the lowest stress reached.
pub fn descend_stress(d: &[Vec<f64>], scale: f64, starts: usize, steps: usize) -> f64 {
    let n = d.len();
    let mut best = f64::INFINITY;
    for s in 0..starts {
        let mut pos: Vec<[f64; 2]> = (0..n)
            .map(|i| {
                let t = (i * (2 * s + 3)) as f64 * 0.9 + s as f64;
                [t.cos() * n as f64, (1.3 * t).sin() * n as f64]
            })
            .collect();
        let mut lr = 0.1;
        let mut e = stress(&pos, d, scale);
        for _ in 0..steps {
            let h = 1e-6;
            let mut grad = vec![[0.0; 2]; n];
            for i in 0..n {
                for c in 0..2 {
                    let mut p = pos.clone();
                    p[i][c] += h;
                    let up = stress(&p, d, scale);
                    p[i][c] -= 2.0 * h;
                    grad[i][c] = (up - stress(&p, d, scale)) / (2.0 * h);
                }
            }
            loop {
                let trial: Vec<[f64; 2]> = pos
                    .iter()
                    .zip(&grad)
                    .map(|(p, g)| [p[0] - lr * g[0], p[1] - lr * g[1]])
                    .collect();
                let et = stress(&trial, d, scale);
                if et < e {
                    pos = trial;
                    e = et;
                    lr *= 1.2;
                    break;
                }
                lr *= 0.5;
                if lr < 1e-14 {
                    break;
                }
            }
        }
        best = best.min(e);
    }
    best
}

/// Small deterministic generator so oracle inputs do not depend on the
/// library's RNG choices.
pub struct SplitMix(pub u64);

impl SplitMix {
    pub fn next(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    pub fn below(&mut self, n: u64) -> u64 {
        self.next() % n
    }

    pub fn unit(&mut self) -> f64 {
        (self.next() >> 11) as f64 / (1u64 << 53) as f64
    }
}

/// Random descriptor sets: up to `records` records over `d0..d{vocab}`.
pub fn random_corpus(rng: &mut SplitMix, records: u64, vocab: u64) -> Vec<BTreeSet<String>> {
    let n = 1 + rng.below(records);
    (0..n)
        .map(|_| {
            let k = rng.below(vocab.min(12) + 1);
            (0..k).map(|_| format!("d{}", rng.below(vocab))).collect()
        })
        .collect()
}

/// Random simple graph on `n` vertices with integer weights `1..=max_w`.
pub fn random_graph(rng: &mut SplitMix, n: usize, p: f64, max_w: u64) -> Vec<(usize, usize, u32)> {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.unit() < p {
                edges.push((i, j, 1 + rng.below(max_w) as u32));
            }
        }
    }
    edges
}

/// Two 4-cliques {0..3} and {4..7} joined by the unit edge 3-4.
pub fn two_cliques() -> Vec<(usize, usize, u32)> {
    let mut edges = Vec::new();
    for base in [0, 4] {
        for i in 0..4 {
            for j in i + 1..4 {
                edges.push((base + i, base + j, 1));
            }
        }
    }
    edges.push((3, 4, 1));
    edges
}
