#![allow(dead_code)]

use std::path::Path;
use std::sync::Arc;

use router_core::nn::{Backend, NnError};
use router_core::pixel::ImageTensor;
use router_service::samples::image_to_dicom;
use router_service::{RouteConfig, Router};

/// Returns the same scores for every image.
pub struct Fixed(pub Vec<f64>);

impl Backend for Fixed {
    fn name(&self) -> &str {
        "fixed"
    }
    fn parameter_count(&self) -> usize {
        0
    }
    fn input_size(&self) -> usize {
        8
    }
    fn logits(&self, _: &ImageTensor) -> Result<Vec<f64>, NnError> {
        Ok(self.0.clone())
    }
}

/// Confident class `floor(5 * mean)` for images darker than 0.95; uniform
/// scores (confidence 0.2) for brighter ones.
pub struct ByBrightness;

impl Backend for ByBrightness {
    fn name(&self) -> &str {
        "by-brightness"
    }
    fn parameter_count(&self) -> usize {
        0
    }
    fn input_size(&self) -> usize {
        8
    }
    fn logits(&self, image: &ImageTensor) -> Result<Vec<f64>, NnError> {
        let v = image.values();
        let mean = v.iter().map(|&x| x as f64).sum::<f64>() / v.len() as f64;
        let mut z = vec![0.0; 5];
        if mean < 0.95 {
            z[((mean * 5.0) as usize).min(4)] = 20.0;
        }
        Ok(z)
    }
}

/// Always fails.
pub struct Broken;

impl Backend for Broken {
    fn name(&self) -> &str {
        "broken"
    }
    fn parameter_count(&self) -> usize {
        0
    }
    fn input_size(&self) -> usize {
        8
    }
    fn logits(&self, _: &ImageTensor) -> Result<Vec<f64>, NnError> {
        Err(NnError::BackendFailure("out of memory".into()))
    }
}

/// Constant-intensity DICOM image; `ByBrightness` routes it to class
/// `floor(5 * value)` or, from 0.95 up, to review.
pub fn flat_dicom(value: f32, uid: &str) -> Vec<u8> {
    image_to_dicom(&ImageTensor::filled(8, 8, value), uid)
}

/// Mid-level of the class band `code` under `ByBrightness`.
pub fn class_value(code: usize) -> f32 {
    (code as f32 + 0.5) / 5.0
}

pub const REVIEW_VALUE: f32 = 0.98;

pub fn router_with(root: &Path, backend: impl Backend + 'static) -> Router {
    Router::open(RouteConfig::local(root), Some(Arc::new(backend))).unwrap()
}

pub fn router_with_config(config: RouteConfig, backend: impl Backend + 'static) -> Router {
    Router::open(config, Some(Arc::new(backend))).unwrap()
}

/// Regular files below `dir`, recursively, excluding `skip` names.
pub fn files_under(dir: &Path) -> Vec<std::path::PathBuf> {
    let mut out = Vec::new();
    let Ok(entries) = std::fs::read_dir(dir) else {
        return out;
    };
    for e in entries {
        let p = e.unwrap().path();
        if p.is_dir() {
            out.extend(files_under(&p));
        } else {
            out.push(p);
        }
    }
    out.sort();
    out
}

/// A received HTTP request: lower-cased header lines and the body.
#[derive(Debug, Clone)]
pub struct Received {
    pub request_line: String,
    pub headers: Vec<(String, String)>,
    pub body: Vec<u8>,
}

impl Received {
    pub fn header(&self, name: &str) -> Option<&str> {
        self.headers
            .iter()
            .find(|(k, _)| k == name)
            .map(|(_, v)| v.as_str())
    }
}

/// Minimal HTTP/1.1 sink on a loopback port. Each connection is answered
/// with the next status from `statuses` (200 once they run out).
pub fn http_sink(statuses: Vec<u16>) -> (String, std::sync::mpsc::Receiver<Received>) {
    use std::io::{BufRead, BufReader, Read, Write};
    let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/store", listener.local_addr().unwrap());
    let (tx, rx) = std::sync::mpsc::channel();
    std::thread::spawn(move || {
        let mut statuses = statuses.into_iter();
        for stream in listener.incoming() {
            let Ok(mut stream) = stream else { return };
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut request_line = String::new();
            reader.read_line(&mut request_line).unwrap();
            let mut headers = Vec::new();
            loop {
                let mut line = String::new();
                reader.read_line(&mut line).unwrap();
                let line = line.trim_end();
                if line.is_empty() {
                    break;
                }
                let (k, v) = line.split_once(':').unwrap();
                headers.push((k.trim().to_ascii_lowercase(), v.trim().to_string()));
            }
            let len: usize = headers
                .iter()
                .find(|(k, _)| k == "content-length")
                .map_or(0, |(_, v)| v.parse().unwrap());
            let mut body = vec![0; len];
            reader.read_exact(&mut body).unwrap();
            let status = statuses.next().unwrap_or(200);
            write!(
                stream,
                "HTTP/1.1 {status} X\r\ncontent-length: 0\r\nconnection: close\r\n\r\n"
            )
            .unwrap();
            let _ = tx.send(Received {
                request_line: request_line.trim_end().to_string(),
                headers,
                body,
            });
        }
    });
    (url, rx)
}
