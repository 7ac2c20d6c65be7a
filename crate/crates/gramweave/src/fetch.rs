//! Keyword article fetching from the Wikipedia web API, offline-first.
//!
//! Cache layout under `<cache>/<keyword-slug>/`:
//!
//! - `index.json`: the keyword, the article limit it was built for, whether
//!   the search ran out of results, and the titles in search order;
//! - `pages/<title-slug>.txt`: the plain-text extract of each title.
//!
//! A request is answered from the cache alone when the index covers at
//! least `max_articles` titles (or the search was exhausted) and every page
//! file is present. Otherwise the API is queried and the cache filled in. If
//! the network is unreachable, whatever the cache holds is used; an empty
//! cache is an error that points at offline ingestion.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use gramweave_core::textprep::RawDocument;
use serde::{Deserialize, Serialize};

use crate::checkpoint::sha256_hex;
use crate::error::{Error, Result};

const USER_AGENT: &str = concat!("gramweave/", env!("CARGO_PKG_VERSION"), " (offline-first corpus fetcher)");
const SEARCH_PAGE: usize = 50;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Index {
    keyword: String,
    max_articles: usize,
    exhausted: bool,
    titles: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FetchOutcome {
    pub document: RawDocument,
    pub articles: usize,
    pub from_cache: bool,
}

fn slug(s: &str) -> String {
    let base: String = s
        .chars()
        .take(48)
        .map(|c| if c.is_ascii_alphanumeric() { c.to_ascii_lowercase() } else { '_' })
        .collect();
    format!("{base}-{}", &sha256_hex(s.as_bytes())[..10])
}

/// Directory holding the cache for `keyword`.
pub fn keyword_dir(cache_dir: &Path, keyword: &str) -> PathBuf {
    cache_dir.join(slug(keyword))
}

fn page_path(dir: &Path, title: &str) -> PathBuf {
    dir.join("pages").join(format!("{}.txt", slug(title)))
}

fn read_index(dir: &Path) -> Option<Index> {
    let text = fs::read_to_string(dir.join("index.json")).ok()?;
    serde_json::from_str(&text).ok()
}

fn write_index(dir: &Path, index: &Index) -> Result<()> {
    let path = dir.join("index.json");
    let json = serde_json::to_string_pretty(index).expect("index serializes");
    fs::write(&path, json).map_err(Error::io(&path))
}

fn assemble(dir: &Path, titles: &[String], max_articles: usize) -> Option<(String, usize)> {
    let mut parts = Vec::new();
    for title in titles.iter().take(max_articles) {
        parts.push(fs::read_to_string(page_path(dir, title)).ok()?);
    }
    Some((parts.join("\n\n"), parts.len()))
}

struct Api {
    client: reqwest::blocking::Client,
    url: String,
}

impl Api {
    fn new(url: &str) -> Result<Self> {
        let client = reqwest::blocking::Client::builder()
            .user_agent(USER_AGENT)
            .timeout(Duration::from_secs(30))
            .build()
            .map_err(|e| Error::Fetch(e.to_string()))?;
        Ok(Self { client, url: url.into() })
    }

    fn get(&self, query: &[(&str, &str)]) -> std::result::Result<serde_json::Value, String> {
        let resp = self
            .client
            .get(&self.url)
            .query(&[("format", "json"), ("formatversion", "2")])
            .query(query)
            .send()
            .map_err(|e| e.to_string())?;
        if !resp.status().is_success() {
            return Err(format!("HTTP {}", resp.status()));
        }
        resp.json().map_err(|e| e.to_string())
    }

    /// Titles matching `keyword`, at most `max`; the flag reports whether
    /// the search ran out before `max`.
    fn search(&self, keyword: &str, max: usize) -> std::result::Result<(Vec<String>, bool), String> {
        let mut titles = Vec::new();
        let mut offset = 0usize;
        while titles.len() < max {
            let limit = SEARCH_PAGE.min(max - titles.len()).to_string();
            let off = offset.to_string();
            let v = self.get(&[
                ("action", "query"),
                ("list", "search"),
                ("srsearch", keyword),
                ("srlimit", &limit),
                ("sroffset", &off),
            ])?;
            let hits = v["query"]["search"].as_array().ok_or("malformed search response")?;
            titles.extend(hits.iter().filter_map(|h| h["title"].as_str().map(String::from)));
            match v["continue"]["sroffset"].as_u64() {
                Some(next) if !hits.is_empty() => offset = next as usize,
                _ => return Ok((titles, true)),
            }
        }
        Ok((titles, false))
    }

    fn extract(&self, title: &str) -> std::result::Result<String, String> {
        let v = self.get(&[("action", "query"), ("prop", "extracts"), ("explaintext", "1"), ("titles", title)])?;
        let page = &v["query"]["pages"][0];
        Ok(page["extract"].as_str().unwrap_or_default().to_owned())
    }
}

/// Fetch up to `max_articles` extracts for `keyword` and concatenate them,
/// separated by blank lines, in search order.
pub fn fetch_articles(keyword: &str, max_articles: usize, cache_dir: &Path, api_url: &str) -> Result<FetchOutcome> {
    if max_articles == 0 {
        return Err(Error::Fetch("max_articles must be at least 1".into()));
    }
    if keyword.trim().is_empty() {
        return Err(Error::Fetch("empty keyword".into()));
    }
    let dir = keyword_dir(cache_dir, keyword);
    let cached = read_index(&dir);
    let document = |text: String| RawDocument::new(text, keyword);
    if let Some(index) = &cached {
        if index.exhausted || index.titles.len() >= max_articles {
            if let Some((text, articles)) = assemble(&dir, &index.titles, max_articles) {
                return Ok(FetchOutcome { document: document(text), articles, from_cache: true });
            }
        }
    }
    match fetch_online(keyword, max_articles, &dir, api_url) {
        Ok(index) => {
            let (text, articles) = assemble(&dir, &index.titles, max_articles)
                .ok_or_else(|| Error::Fetch("cache became unreadable".into()))?;
            Ok(FetchOutcome { document: document(text), articles, from_cache: false })
        }
        Err(network) => {
            let usable = cached.and_then(|index| assemble(&dir, &index.titles, max_articles));
            match usable {
                Some((text, articles)) if articles > 0 => {
                    Ok(FetchOutcome { document: document(text), articles, from_cache: true })
                }
                _ => Err(Error::Fetch(format!(
                    "{network}; no cached articles for {keyword:?} in {}. \
                     Work offline instead: `gramweave ingest --input FILE` on a local text file, \
                     or set `corpus = \"FILE\"` in the config",
                    cache_dir.display()
                ))),
            }
        }
    }
}

fn fetch_online(keyword: &str, max_articles: usize, dir: &Path, api_url: &str) -> Result<Index> {
    let api = Api::new(api_url)?;
    let (titles, exhausted) = api.search(keyword, max_articles).map_err(Error::Fetch)?;
    let pages = dir.join("pages");
    fs::create_dir_all(&pages).map_err(Error::io(&pages))?;
    for title in &titles {
        let path = page_path(dir, title);
        if path.exists() {
            continue;
        }
        let text = api.extract(title).map_err(Error::Fetch)?;
        fs::write(&path, text).map_err(Error::io(&path))?;
    }
    let index = Index { keyword: keyword.into(), max_articles, exhausted, titles };
    write_index(dir, &index)?;
    Ok(index)
}

/// Pre-populate the cache with `(title, text)` pages, as if fetched.
pub fn seed_cache(cache_dir: &Path, keyword: &str, pages: &[(&str, &str)]) -> Result<()> {
    let dir = keyword_dir(cache_dir, keyword);
    let pages_dir = dir.join("pages");
    fs::create_dir_all(&pages_dir).map_err(Error::io(&pages_dir))?;
    for (title, text) in pages {
        let path = page_path(&dir, title);
        fs::write(&path, text).map_err(Error::io(&path))?;
    }
    let index = Index {
        keyword: keyword.into(),
        max_articles: pages.len(),
        exhausted: true,
        titles: pages.iter().map(|(t, _)| t.to_string()).collect(),
    };
    write_index(&dir, &index)
}
