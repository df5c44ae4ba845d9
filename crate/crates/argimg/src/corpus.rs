//! Corpus directories: `<dir>/<image_id>/image.(png|pgm)`, `page-text.txt`
//! and optional `image-text.txt`.

use std::fs;
use std::io::ErrorKind;
use std::path::{Path, PathBuf};

use argimg_core::pipeline::DocumentSource;
use argimg_core::ImageDocument;

use crate::error::{Error, Result};
use crate::image_io::load_image;

pub const PAGE_TEXT: &str = "page-text.txt";
pub const IMAGE_TEXT: &str = "image-text.txt";
pub const IMAGE_NAMES: [&str; 2] = ["image.png", "image.pgm"];

/// Lazy handle over a corpus directory. Only the id list is read on open.
#[derive(Debug, Clone)]
pub struct Corpus {
    root: PathBuf,
    ids: Vec<String>,
}

impl Corpus {
    pub fn open(root: &Path) -> Result<Self> {
        let mut ids = Vec::new();
        for entry in fs::read_dir(root).map_err(|e| Error::io(root, e))? {
            let entry = entry.map_err(|e| Error::io(root, e))?;
            let ty = entry.file_type().map_err(|e| Error::io(entry.path(), e))?;
            if !ty.is_dir() {
                continue;
            }
            let name = entry.file_name().into_string().map_err(|n| Error::Image {
                path: root.join(n),
                message: "document id is not valid UTF-8".into(),
            })?;
            ids.push(name);
        }
        ids.sort();
        Ok(Self {
            root: root.to_path_buf(),
            ids,
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    fn doc_dir(&self, ordinal: usize) -> PathBuf {
        self.root.join(&self.ids[ordinal])
    }

    pub fn page_text(&self, ordinal: usize) -> Result<String> {
        let path = self.doc_dir(ordinal).join(PAGE_TEXT);
        fs::read_to_string(&path).map_err(|e| match e.kind() {
            ErrorKind::NotFound => Error::MissingPageText {
                id: self.ids[ordinal].clone(),
            },
            _ => Error::io(path, e),
        })
    }

    pub fn image_text(&self, ordinal: usize) -> Result<String> {
        let path = self.doc_dir(ordinal).join(IMAGE_TEXT);
        match fs::read_to_string(&path) {
            Ok(t) => Ok(t),
            Err(e) if e.kind() == ErrorKind::NotFound => Ok(String::new()),
            Err(e) => Err(Error::io(path, e)),
        }
    }

    pub fn image_path(&self, ordinal: usize) -> Result<PathBuf> {
        let dir = self.doc_dir(ordinal);
        IMAGE_NAMES
            .iter()
            .map(|n| dir.join(n))
            .find(|p| p.is_file())
            .ok_or_else(|| Error::MissingImage {
                id: self.ids[ordinal].clone(),
            })
    }

    pub fn load(&self, ordinal: usize) -> Result<ImageDocument> {
        let page_text = self.page_text(ordinal)?;
        let image_text = self.image_text(ordinal)?;
        let image = load_image(&self.image_path(ordinal)?)?;
        Ok(ImageDocument {
            id: self.ids[ordinal].clone(),
            image,
            page_text,
            image_text,
        })
    }

    /// Documents in id order, loaded one at a time.
    pub fn iter(&self) -> impl Iterator<Item = Result<ImageDocument>> + '_ {
        (0..self.ids.len()).map(|i| self.load(i))
    }

    /// `(id, page_text)` pairs in id order, without decoding images.
    pub fn page_texts(&self) -> Result<Vec<(String, String)>> {
        (0..self.ids.len())
            .map(|i| Ok((self.ids[i].clone(), self.page_text(i)?)))
            .collect()
    }
}

impl DocumentSource for Corpus {
    fn len(&self) -> usize {
        self.ids.len()
    }

    fn document(&self, ordinal: usize) -> argimg_core::Result<ImageDocument> {
        if ordinal >= self.ids.len() {
            return Err(argimg_core::Error::InvalidArgument("document ordinal out of range"));
        }
        self.load(ordinal)
            .map_err(|e| argimg_core::Error::Source(e.to_string()))
    }
}

/// Writes one document in corpus layout. `image_text` is written only when
/// non-empty.
pub fn write_document(root: &Path, doc: &ImageDocument, image_ext: &str) -> Result<()> {
    let dir = root.join(&doc.id);
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    crate::image_io::save_image(&doc.image, &dir.join(format!("image.{image_ext}")))?;
    let p = dir.join(PAGE_TEXT);
    fs::write(&p, &doc.page_text).map_err(|e| Error::io(&p, e))?;
    if !doc.image_text.is_empty() {
        let p = dir.join(IMAGE_TEXT);
        fs::write(&p, &doc.image_text).map_err(|e| Error::io(&p, e))?;
    }
    Ok(())
}
