//! Local document retrieval: paragraph chunking, an inverted index and
//! BM25 ranking behind the [`Scorer`] trait.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

pub const TARGET_CHARS: usize = 1000;
pub const OVERLAP_CHARS: usize = 200;
pub const MAX_CHUNK_CHARS: usize = 1500;
pub const MAGIC: &str = "IFCMCP-KB v1\n";

/// File extensions picked up by [`index_corpus`].
const TEXT_EXTENSIONS: &[&str] = &["md", "markdown", "txt", "rst", "py"];

#[derive(Debug, thiserror::Error)]
pub enum KnowledgeError {
    #[error("I/O error on {path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("the knowledge index is empty")]
    EmptyIndex,
    #[error("not a knowledge index: {0}")]
    BadIndex(String),
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> KnowledgeError {
    KnowledgeError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocChunk {
    pub doc_id: String,
    pub chunk_index: usize,
    pub text: String,
    pub source_path: String,
    pub tags: Vec<String>,
}

/// Lower-cased alphanumeric runs of at least two characters.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| t.chars().count() >= 2)
        .map(str::to_lowercase)
        .collect()
}

fn char_len(s: &str) -> usize {
    s.chars().count()
}

/// Splits a paragraph longer than the target at word boundaries.
fn split_long(par: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    for word in par.split_whitespace() {
        let mut word = word.to_string();
        while char_len(&word) > TARGET_CHARS {
            if !cur.is_empty() {
                out.push(std::mem::take(&mut cur));
            }
            let head: String = word.chars().take(TARGET_CHARS).collect();
            word = word.chars().skip(TARGET_CHARS).collect();
            out.push(head);
        }
        if word.is_empty() {
            continue;
        }
        if !cur.is_empty() && char_len(&cur) + 1 + char_len(&word) > TARGET_CHARS {
            out.push(std::mem::take(&mut cur));
        }
        if !cur.is_empty() {
            cur.push(' ');
        }
        cur.push_str(&word);
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

/// Last `OVERLAP_CHARS` characters of a chunk, starting at a word boundary.
fn overlap_tail(chunk: &str) -> String {
    let n = char_len(chunk);
    if n <= OVERLAP_CHARS {
        return chunk.to_string();
    }
    let tail: String = chunk.chars().skip(n - OVERLAP_CHARS).collect();
    match tail.find(char::is_whitespace) {
        Some(i) => tail[i..].trim_start().to_string(),
        None => tail,
    }
}

/// Packs paragraphs into chunks of about [`TARGET_CHARS`] characters. Each
/// chunk after the first starts with the tail of its predecessor.
pub fn chunk_text(text: &str) -> Vec<String> {
    let mut pieces = Vec::new();
    let normalized = text.replace("\r\n", "\n");
    let mut par = String::new();
    for line in normalized.lines().chain(std::iter::once("")) {
        if line.trim().is_empty() {
            if !par.trim().is_empty() {
                let p = par.trim().to_string();
                if char_len(&p) > TARGET_CHARS {
                    pieces.extend(split_long(&p));
                } else {
                    pieces.push(p);
                }
            }
            par.clear();
        } else {
            if !par.is_empty() {
                par.push('\n');
            }
            par.push_str(line);
        }
    }
    let mut chunks = Vec::new();
    let mut cur = String::new();
    for p in pieces {
        // cur always holds at least one new piece here
        if !cur.is_empty() && char_len(&cur) + 2 + char_len(&p) > TARGET_CHARS {
            let tail = overlap_tail(&cur);
            chunks.push(std::mem::replace(&mut cur, tail));
        }
        if !cur.is_empty() {
            cur.push_str("\n\n");
        }
        cur.push_str(&p);
    }
    if !cur.is_empty() {
        chunks.push(cur);
    }
    chunks
}

/// Ranks chunks for a tokenized query; returns one score per chunk.
pub trait Scorer {
    fn score(&self, index: &KnowledgeIndex, query: &[String]) -> Vec<f64>;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bm25 {
    pub k1: f64,
    pub b: f64,
}

impl Default for Bm25 {
    fn default() -> Self {
        Self { k1: 1.2, b: 0.75 }
    }
}

impl Scorer for Bm25 {
    fn score(&self, index: &KnowledgeIndex, query: &[String]) -> Vec<f64> {
        let n = index.chunks.len() as f64;
        let mut scores = vec![0.0; index.chunks.len()];
        let mut terms: Vec<&String> = query.iter().collect();
        terms.sort();
        terms.dedup();
        for term in terms {
            let Some(postings) = index.postings.get(term) else { continue };
            let df = postings.len() as f64;
            let idf = (1.0 + (n - df + 0.5) / (df + 0.5)).ln();
            for &(doc, tf) in postings {
                let tf = tf as f64;
                let dl = index.lengths[doc] as f64;
                let norm = 1.0 - self.b + self.b * dl / index.avg_len.max(f64::MIN_POSITIVE);
                scores[doc] += idf * tf * (self.k1 + 1.0) / (tf + self.k1 * norm);
            }
        }
        scores
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Persisted {
    k1: f64,
    b: f64,
    chunks: Vec<DocChunk>,
}

#[derive(Debug, Clone, Default)]
pub struct KnowledgeIndex {
    chunks: Vec<DocChunk>,
    /// term -> (chunk position, term frequency), positions ascending.
    postings: HashMap<String, Vec<(usize, u32)>>,
    lengths: Vec<usize>,
    avg_len: f64,
    bm25: Bm25,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchHit {
    pub chunk: DocChunk,
    pub score: f64,
}

impl KnowledgeIndex {
    pub fn build(mut chunks: Vec<DocChunk>) -> Self {
        chunks.sort_by(|a, b| (&a.doc_id, a.chunk_index).cmp(&(&b.doc_id, b.chunk_index)));
        let mut postings: HashMap<String, Vec<(usize, u32)>> = HashMap::new();
        let mut lengths = Vec::with_capacity(chunks.len());
        for (i, c) in chunks.iter().enumerate() {
            let toks = tokenize(&c.text);
            lengths.push(toks.len());
            let mut tf: BTreeMap<String, u32> = BTreeMap::new();
            for t in toks {
                *tf.entry(t).or_default() += 1;
            }
            for (t, f) in tf {
                postings.entry(t).or_default().push((i, f));
            }
        }
        let avg_len = if lengths.is_empty() {
            0.0
        } else {
            lengths.iter().sum::<usize>() as f64 / lengths.len() as f64
        };
        Self {
            chunks,
            postings,
            lengths,
            avg_len,
            bm25: Bm25::default(),
        }
    }

    pub fn len(&self) -> usize {
        self.chunks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chunks.is_empty()
    }

    pub fn chunks(&self) -> &[DocChunk] {
        &self.chunks
    }

    pub fn search(&self, query: &str, k: usize) -> Result<Vec<SearchHit>, KnowledgeError> {
        self.search_with(&self.bm25, query, k)
    }

    /// Chunks with a positive score, best first; ties by (doc_id, chunk_index).
    pub fn search_with(&self, scorer: &dyn Scorer, query: &str, k: usize) -> Result<Vec<SearchHit>, KnowledgeError> {
        if self.chunks.is_empty() {
            return Err(KnowledgeError::EmptyIndex);
        }
        let scores = scorer.score(self, &tokenize(query));
        let mut ranked: Vec<(usize, f64)> = scores.into_iter().enumerate().filter(|(_, s)| *s > 0.0).collect();
        // chunks are stored in (doc_id, chunk_index) order, so position breaks ties
        ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        Ok(ranked
            .into_iter()
            .take(k)
            .map(|(i, score)| SearchHit {
                chunk: self.chunks[i].clone(),
                score,
            })
            .collect())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let p = Persisted {
            k1: self.bm25.k1,
            b: self.bm25.b,
            chunks: self.chunks.clone(),
        };
        let mut out = MAGIC.as_bytes().to_vec();
        out.extend(serde_json::to_vec(&p).expect("chunks serialize"));
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, KnowledgeError> {
        let body = bytes
            .strip_prefix(MAGIC.as_bytes())
            .ok_or_else(|| KnowledgeError::BadIndex("missing IFCMCP-KB v1 header".into()))?;
        let p: Persisted = serde_json::from_slice(body).map_err(|e| KnowledgeError::BadIndex(e.to_string()))?;
        let mut idx = Self::build(p.chunks);
        idx.bm25 = Bm25 { k1: p.k1, b: p.b };
        Ok(idx)
    }

    /// Writes to a sibling temporary file and renames it into place.
    pub fn save(&self, path: &Path) -> Result<(), KnowledgeError> {
        let tmp = path.with_extension("tmp");
        fs::write(&tmp, self.to_bytes()).map_err(|e| io_err(&tmp, e))?;
        fs::rename(&tmp, path).map_err(|e| io_err(path, e))
    }

    pub fn load(path: &Path) -> Result<Self, KnowledgeError> {
        Self::from_bytes(&fs::read(path).map_err(|e| io_err(path, e))?)
    }
}

fn collect_files(dir: &Path, out: &mut Vec<PathBuf>) -> Result<(), KnowledgeError> {
    let mut entries: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| io_err(dir, e))?
        .map(|e| e.map(|e| e.path()).map_err(|err| io_err(dir, err)))
        .collect::<Result<_, _>>()?;
    entries.sort();
    for p in entries {
        let hidden = p.file_name().and_then(|n| n.to_str()).is_some_and(|n| n.starts_with('.'));
        if hidden {
            continue;
        }
        if p.is_dir() {
            collect_files(&p, out)?;
        } else if p
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| TEXT_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()))
        {
            out.push(p);
        }
    }
    Ok(())
}

fn tags_for(rel: &Path) -> Vec<String> {
    let mut tags: Vec<String> = rel
        .parent()
        .into_iter()
        .flat_map(|p| p.components())
        .filter_map(|c| c.as_os_str().to_str())
        .map(str::to_lowercase)
        .collect();
    if rel.extension().and_then(|e| e.to_str()) == Some("py") {
        tags.push("example".into());
    }
    tags.dedup();
    tags
}

/// Chunks every text file below `root` and builds an index.
pub fn index_corpus(root: &Path) -> Result<KnowledgeIndex, KnowledgeError> {
    let mut files = Vec::new();
    collect_files(root, &mut files)?;
    let mut chunks = Vec::new();
    for path in files {
        let bytes = fs::read(&path).map_err(|e| io_err(&path, e))?;
        let text = String::from_utf8(bytes).map_err(|e| io_err(&path, e))?;
        let rel = path.strip_prefix(root).unwrap_or(&path);
        let doc_id = rel
            .components()
            .filter_map(|c| c.as_os_str().to_str())
            .collect::<Vec<_>>()
            .join("/");
        let tags = tags_for(rel);
        for (i, t) in chunk_text(&text).into_iter().enumerate() {
            chunks.push(DocChunk {
                doc_id: doc_id.clone(),
                chunk_index: i,
                text: t,
                source_path: path.display().to_string(),
                tags: tags.clone(),
            });
        }
    }
    Ok(KnowledgeIndex::build(chunks))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chunk(doc: &str, i: usize, text: &str) -> DocChunk {
        DocChunk {
            doc_id: doc.into(),
            chunk_index: i,
            text: text.into(),
            source_path: doc.into(),
            tags: vec![],
        }
    }

    #[test]
    fn tokenizer() {
        assert_eq!(tokenize("IfcWall, a wall-type! x2"), ["ifcwall", "wall", "type", "x2"]);
    }

    #[test]
    fn short_paragraphs_stay_whole() {
        assert_eq!(chunk_text("one paragraph\nsecond line"), ["one paragraph\nsecond line"]);
        assert!(chunk_text("  \n\n ").is_empty());
    }

    #[test]
    fn long_document_overlaps() {
        let par = |i: usize| format!("p{i} {}", "lorem ipsum dolor ".repeat(10));
        let text: Vec<String> = (0..28).map(par).collect();
        let text = text.join("\n\n");
        let total = char_len(&text);
        assert!(total >= 5000);
        let chunks = chunk_text(&text);
        // oracle: each chunk contributes at most TARGET - OVERLAP new characters
        assert!(chunks.len() >= total.div_ceil(TARGET_CHARS));
        assert!(chunks.len() >= 5);
        for w in chunks.windows(2) {
            let tail = overlap_tail(&w[0]);
            assert!(w[1].starts_with(&tail));
            assert!(char_len(&tail) <= OVERLAP_CHARS);
        }
        assert!(chunks.iter().all(|c| char_len(c) <= MAX_CHUNK_CHARS));
    }

    #[test]
    fn unbroken_text_is_split() {
        let text = "word ".repeat(1200);
        let chunks = chunk_text(&text);
        assert!(chunks.len() >= 6);
        assert!(chunks.iter().all(|c| char_len(c) <= MAX_CHUNK_CHARS));
        let blob = "x".repeat(2500);
        assert!(chunk_text(&blob).iter().all(|c| char_len(c) <= MAX_CHUNK_CHARS));
    }

    #[test]
    fn ranking() {
        let idx = KnowledgeIndex::build(vec![
            chunk("b", 0, "walls and slabs"),
            chunk("a", 0, "IfcRoof hip roof skeleton"),
            chunk("a", 1, "walls walls walls"),
        ]);
        let hits = idx.search("roof", 5).unwrap();
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].chunk.doc_id, "a");
        let hits = idx.search("walls", 5).unwrap();
        assert_eq!((hits[0].chunk.doc_id.as_str(), hits[0].chunk.chunk_index), ("a", 1));
        assert!(hits.windows(2).all(|w| w[0].score >= w[1].score));
        assert!(idx.search("the of", 5).unwrap().is_empty());
        assert_eq!(idx.search("walls slabs roof", 10).unwrap().len(), 3);
    }

    #[test]
    fn ties_break_by_doc_then_chunk() {
        let idx = KnowledgeIndex::build(vec![chunk("z", 0, "beam"), chunk("m", 2, "beam"), chunk("m", 1, "beam")]);
        let order: Vec<(String, usize)> = idx
            .search("beam", 5)
            .unwrap()
            .into_iter()
            .map(|h| (h.chunk.doc_id, h.chunk.chunk_index))
            .collect();
        assert_eq!(order, [("m".into(), 1), ("m".into(), 2), ("z".into(), 0)]);
    }

    #[test]
    fn empty_index() {
        let idx = KnowledgeIndex::build(vec![]);
        assert!(matches!(idx.search("x", 3), Err(KnowledgeError::EmptyIndex)));
        assert!(KnowledgeIndex::from_bytes(&idx.to_bytes()).unwrap().is_empty());
        assert!(matches!(KnowledgeIndex::from_bytes(b"nope"), Err(KnowledgeError::BadIndex(_))));
    }

    #[test]
    fn corpus_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        fs::create_dir(dir.path().join("schema")).unwrap();
        fs::write(dir.path().join("schema/wall.md"), "IfcWall is a vertical element.").unwrap();
        fs::write(dir.path().join("door.txt"), "IfcDoor fills an opening.").unwrap();
        fs::write(dir.path().join("ex.py"), "model.create_entity('IfcSlab')").unwrap();
        fs::write(dir.path().join("image.png"), [0u8, 159, 146]).unwrap();
        let idx = index_corpus(dir.path()).unwrap();
        assert_eq!(idx.len(), 3);
        assert_eq!(idx.chunks()[2].doc_id, "schema/wall.md");
        assert_eq!(idx.chunks()[2].tags, ["schema"]);
        let path = dir.path().join("kb.idx");
        idx.save(&path).unwrap();
        let back = KnowledgeIndex::load(&path).unwrap();
        assert_eq!(back.search("ifcdoor opening", 5).unwrap(), idx.search("ifcdoor opening", 5).unwrap());
        assert!(index_corpus(&dir.path().join("missing")).is_err());
    }
}
