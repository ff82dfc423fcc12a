use std::fs;
use std::io::{self, Read};
use std::path::{Path, PathBuf};

use image::{ColorType, DynamicImage};

use super::{to_luma, LumaFrame, RgbFrame};
use crate::error::{invalid, Error, Result};

const IMAGE_EXTS: &[&str] = &["png", "pgm", "ppm", "pnm", "pbm"];

/// Image files in `dir`, in lexicographic order of file name.
pub fn list_image_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.is_file()
                && p.extension()
                    .and_then(|e| e.to_str())
                    .is_some_and(|e| IMAGE_EXTS.contains(&e.to_ascii_lowercase().as_str()))
        })
        .collect();
    files.sort();
    Ok(files)
}

fn dynamic_to_luma(img: DynamicImage) -> LumaFrame {
    let (w, h) = (img.width() as usize, img.height() as usize);
    match img.color() {
        ColorType::L8 | ColorType::La8 => {
            let data = img.to_luma8().into_raw().into_iter().map(f64::from).collect();
            LumaFrame::new(w, h, data, 0.0).expect("decoded gray image has consistent shape")
        }
        ColorType::L16 | ColorType::La16 => {
            let data = img
                .to_luma16()
                .into_raw()
                .into_iter()
                .map(|v| f64::from(v) / 257.0)
                .collect();
            LumaFrame::new(w, h, data, 0.0).expect("decoded gray image has consistent shape")
        }
        _ => {
            let data = img.to_rgb8().into_raw().into_iter().map(f64::from).collect();
            to_luma(&RgbFrame {
                width: w,
                height: h,
                data,
            })
        }
    }
}

/// Decodes one image file to luma. Gray images pass through unchanged.
pub fn load_image_luma(path: &Path) -> Result<LumaFrame> {
    let img = image::open(path).map_err(|source| match source {
        image::ImageError::IoError(e) => Error::Io(e),
        source => Error::Image {
            path: path.to_owned(),
            source,
        },
    })?;
    Ok(dynamic_to_luma(img))
}

/// Lazily decodes a directory of numbered frames.
#[derive(Debug)]
pub struct ImageDirSource {
    files: std::vec::IntoIter<PathBuf>,
    len: usize,
}

impl ImageDirSource {
    pub fn open(dir: &Path) -> Result<Self> {
        let files = list_image_files(dir)?;
        if files.is_empty() {
            return Err(Error::Io(io::Error::new(
                io::ErrorKind::NotFound,
                format!("no image files in {}", dir.display()),
            )));
        }
        Ok(Self {
            len: files.len(),
            files: files.into_iter(),
        })
    }

    pub fn frame_count(&self) -> usize {
        self.len
    }
}

impl Iterator for ImageDirSource {
    type Item = Result<LumaFrame>;

    fn next(&mut self) -> Option<Self::Item> {
        self.files.next().map(|p| load_image_luma(&p))
    }
}

/// Headerless 8-bit grayscale frames of a fixed size, back to back.
pub struct RawGraySource<R> {
    reader: R,
    width: usize,
    height: usize,
    buf: Vec<u8>,
    done: bool,
}

impl<R: Read> RawGraySource<R> {
    pub fn new(reader: R, width: usize, height: usize) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(invalid("raw stream needs non-zero --width and --height"));
        }
        Ok(Self {
            reader,
            width,
            height,
            buf: vec![0; width * height],
            done: false,
        })
    }
}

impl<R: Read> Iterator for RawGraySource<R> {
    type Item = Result<LumaFrame>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let mut filled = 0;
        while filled < self.buf.len() {
            match self.reader.read(&mut self.buf[filled..]) {
                Ok(0) => break,
                Ok(n) => filled += n,
                Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
                Err(e) => {
                    self.done = true;
                    return Some(Err(e.into()));
                }
            }
        }
        if filled == 0 {
            self.done = true;
            return None;
        }
        if filled < self.buf.len() {
            self.done = true;
            return Some(Err(Error::Io(io::Error::new(
                io::ErrorKind::UnexpectedEof,
                format!("partial raw frame: {filled} of {} bytes", self.buf.len()),
            ))));
        }
        let data = self.buf.iter().copied().map(f64::from).collect();
        Some(Ok(LumaFrame {
            width: self.width,
            height: self.height,
            data,
            timestamp: 0.0,
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use image::{GrayImage, RgbImage};

    #[test]
    fn raw_stream_frames() {
        let bytes: Vec<u8> = (0..12).collect();
        let frames: Vec<_> = RawGraySource::new(&bytes[..], 3, 2)
            .unwrap()
            .collect::<Result<_>>()
            .unwrap();
        assert_eq!(frames.len(), 2);
        assert_eq!(frames[1].data, vec![6.0, 7.0, 8.0, 9.0, 10.0, 11.0]);

        let short: Vec<u8> = (0..8).collect();
        let mut src = RawGraySource::new(&short[..], 3, 2).unwrap();
        assert!(src.next().unwrap().is_ok());
        assert!(src.next().unwrap().is_err());
        assert!(src.next().is_none());
    }

    #[test]
    fn image_dir_is_lexicographic_and_converts_color() {
        let dir = tempfile::tempdir().unwrap();
        GrayImage::from_pixel(2, 2, image::Luma([10]))
            .save(dir.path().join("f002.png"))
            .unwrap();
        RgbImage::from_pixel(2, 2, image::Rgb([255, 0, 0]))
            .save(dir.path().join("f001.png"))
            .unwrap();
        GrayImage::from_pixel(2, 2, image::Luma([77]))
            .save(dir.path().join("f003.pgm"))
            .unwrap();
        fs::write(dir.path().join("notes.txt"), "skip").unwrap();
        let frames: Vec<_> = ImageDirSource::open(dir.path())
            .unwrap()
            .collect::<Result<_>>()
            .unwrap();
        assert_eq!(frames.len(), 3);
        assert!((frames[0].data[0] - 54.213).abs() < 1e-9);
        assert_eq!(frames[1].data[0], 10.0);
        assert_eq!(frames[2].data[0], 77.0);
    }

    #[test]
    fn empty_dir_is_error() {
        let dir = tempfile::tempdir().unwrap();
        assert!(ImageDirSource::open(dir.path()).is_err());
    }
}
