use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{validate_record, ReferenceSummaries, Segment, SourceStream, SourceTag, VideoRecord};
use crate::error::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StreamEntry {
    pub path: String,
    pub dim: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UsersEntry {
    pub path: String,
    pub n_users: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VideoEntry {
    pub id: String,
    pub n_frames: usize,
    pub picks: Vec<usize>,
    pub streams: BTreeMap<SourceTag, StreamEntry>,
    pub users: UsersEntry,
    pub change_points: Option<Vec<Segment>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub dataset_name: String,
    pub videos: Vec<VideoEntry>,
}

/// A manifest together with its fully loaded records, in manifest order.
#[derive(Clone, Debug)]
pub struct Dataset {
    pub manifest: DatasetManifest,
    pub videos: Vec<VideoRecord>,
}

impl Dataset {
    pub fn keys(&self) -> Vec<String> {
        self.videos.iter().map(|v| v.video_id.clone()).collect()
    }

    pub fn get(&self, video_id: &str) -> Option<&VideoRecord> {
        self.videos.iter().find(|v| v.video_id == video_id)
    }

    pub fn name(&self) -> &str {
        &self.manifest.dataset_name
    }
}

/// Reads `root/manifest.json` and every file it references.
///
/// Structural problems (byte lengths, invariants) for all videos are gathered
/// into a single [`Error::Invalid`]; a missing file aborts with [`Error::Io`].
pub fn load_dataset(root: impl AsRef<Path>) -> Result<Dataset> {
    let root = root.as_ref();
    let manifest_path = root.join(MANIFEST_FILE);
    let text = fs::read_to_string(&manifest_path).map_err(|e| Error::io(&manifest_path, e))?;
    let manifest: DatasetManifest =
        serde_json::from_str(&text).map_err(|e| Error::json(&manifest_path, e))?;

    let mut problems = Vec::new();
    let mut seen = BTreeSet::new();
    for entry in &manifest.videos {
        if !seen.insert(entry.id.as_str()) {
            problems.push(format!("{}: duplicate video id", entry.id));
        }
    }

    let mut videos = Vec::with_capacity(manifest.videos.len());
    for entry in &manifest.videos {
        match load_video(root, entry) {
            Ok(record) => {
                problems.extend(validate_record(&record));
                videos.push(record);
            }
            Err(Error::Shape(msg)) => problems.push(msg),
            Err(e) => return Err(e),
        }
    }
    if !problems.is_empty() {
        return Err(Error::Invalid(problems));
    }
    Ok(Dataset { manifest, videos })
}

fn load_video(root: &Path, entry: &VideoEntry) -> Result<VideoRecord> {
    let n_steps = entry.picks.len();
    let mut streams = BTreeMap::new();
    for (&tag, s) in &entry.streams {
        let path = root.join(&s.path);
        let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
        let expected = n_steps * s.dim * 4;
        if bytes.len() != expected {
            return Err(Error::Shape(format!(
                "{}: stream `{tag}` file {} has {} bytes, expected {expected} ({n_steps} steps × {} dim × 4)",
                entry.id,
                path.display(),
                bytes.len(),
                s.dim
            )));
        }
        let values = decode_f32_le(&bytes);
        streams.insert(tag, SourceStream::new(tag, n_steps, s.dim, values));
    }

    let users_path = root.join(&entry.users.path);
    let masks = fs::read(&users_path).map_err(|e| Error::io(&users_path, e))?;
    let expected = entry.users.n_users * entry.n_frames;
    if masks.len() != expected {
        return Err(Error::Shape(format!(
            "{}: users file {} has {} bytes, expected {expected} ({} users × {} frames)",
            entry.id,
            users_path.display(),
            masks.len(),
            entry.users.n_users,
            entry.n_frames
        )));
    }

    Ok(VideoRecord {
        video_id: entry.id.clone(),
        n_frames: entry.n_frames,
        picks: entry.picks.clone(),
        streams,
        references: ReferenceSummaries {
            n_users: entry.users.n_users,
            n_frames: entry.n_frames,
            masks,
        },
        change_points: entry.change_points.clone(),
    })
}

/// Writes `records` under `root` (features/, users/, manifest.json) and
/// returns the manifest. Features are narrowed to f32.
pub fn save_dataset(
    root: impl AsRef<Path>,
    dataset_name: &str,
    records: &[VideoRecord],
) -> Result<DatasetManifest> {
    let root = root.as_ref();
    for sub in ["features", "users"] {
        let dir = root.join(sub);
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    }

    let mut videos = Vec::with_capacity(records.len());
    for r in records {
        let mut streams = BTreeMap::new();
        for (&tag, s) in &r.streams {
            let rel = format!("features/{}_{}.f32", r.video_id, tag);
            write_file(&root.join(&rel), &encode_f32_le(&s.values))?;
            streams.insert(
                tag,
                StreamEntry {
                    path: rel,
                    dim: s.dim,
                },
            );
        }
        let rel = format!("users/{}.u8", r.video_id);
        write_file(&root.join(&rel), &r.references.masks)?;
        videos.push(VideoEntry {
            id: r.video_id.clone(),
            n_frames: r.n_frames,
            picks: r.picks.clone(),
            streams,
            users: UsersEntry {
                path: rel,
                n_users: r.references.n_users,
            },
            change_points: r.change_points.clone(),
        });
    }

    let manifest = DatasetManifest {
        dataset_name: dataset_name.to_string(),
        videos,
    };
    let mut json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    json.push('\n');
    write_file(&root.join(MANIFEST_FILE), json.as_bytes())?;
    Ok(manifest)
}

pub(crate) fn write_file(path: &PathBuf, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub(crate) fn encode_f32_le(values: &[f64]) -> Vec<u8> {
    values
        .iter()
        .flat_map(|&v| (v as f32).to_le_bytes())
        .collect()
}

pub(crate) fn decode_f32_le(bytes: &[u8]) -> Vec<f64> {
    bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
        .collect()
}
