//! STL reading and writing. Units are taken as millimeters.

use std::fmt::Write as _;

use super::{GeometryError, Point3, Result, TriangleMesh};

const HEADER_LEN: usize = 80;
const FACET_LEN: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StlFormat {
    Binary,
    Ascii,
}

impl StlFormat {
    /// Guesses the encoding. A file whose length matches the binary layout
    /// exactly is binary even when its header happens to start with `solid`.
    pub fn detect(bytes: &[u8]) -> Self {
        if bytes.len() >= HEADER_LEN + 4 {
            let n = u32::from_le_bytes(bytes[HEADER_LEN..HEADER_LEN + 4].try_into().unwrap());
            if bytes.len() == HEADER_LEN + 4 + FACET_LEN * n as usize {
                return Self::Binary;
            }
        }
        let head = String::from_utf8_lossy(&bytes[..bytes.len().min(512)]);
        if head.trim_start().starts_with("solid") {
            Self::Ascii
        } else {
            Self::Binary
        }
    }
}

/// Parses an STL stream and builds a validated mesh with merged vertices.
pub fn load_mesh(bytes: &[u8], format: StlFormat) -> Result<TriangleMesh> {
    let soup = match format {
        StlFormat::Binary => parse_binary(bytes)?,
        StlFormat::Ascii => parse_ascii(bytes)?,
    };
    TriangleMesh::from_triangle_soup(&soup)
}

fn parse_err(offset: usize, message: impl Into<String>) -> GeometryError {
    GeometryError::Parse {
        offset,
        message: message.into(),
    }
}

fn parse_binary(bytes: &[u8]) -> Result<Vec<[Point3; 3]>> {
    if bytes.len() < HEADER_LEN + 4 {
        return Err(parse_err(bytes.len(), "truncated header"));
    }
    let count = u32::from_le_bytes(bytes[HEADER_LEN..HEADER_LEN + 4].try_into().unwrap()) as usize;
    let body = HEADER_LEN + 4;
    let needed = count
        .checked_mul(FACET_LEN)
        .and_then(|n| n.checked_add(body))
        .ok_or_else(|| parse_err(HEADER_LEN, "triangle count overflows"))?;
    if bytes.len() < needed {
        let complete = (bytes.len() - body) / FACET_LEN;
        return Err(parse_err(
            body + complete * FACET_LEN,
            format!("header declares {count} triangles, stream holds {complete}"),
        ));
    }
    let mut soup = Vec::with_capacity(count);
    for t in 0..count {
        let base = body + t * FACET_LEN;
        let mut tri = [[0.0; 3]; 3];
        for (v, vertex) in tri.iter_mut().enumerate() {
            for (k, c) in vertex.iter_mut().enumerate() {
                // skip the 12-byte facet normal
                let at = base + 12 + 12 * v + 4 * k;
                let value = f32::from_le_bytes(bytes[at..at + 4].try_into().unwrap());
                if !value.is_finite() {
                    return Err(parse_err(at, "non-finite coordinate"));
                }
                *c = f64::from(value);
            }
        }
        soup.push(tri);
    }
    Ok(soup)
}

struct Tokens<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> Tokens<'a> {
    fn next(&mut self) -> Option<(usize, &'a str)> {
        let rest = &self.text[self.pos..];
        let start = self.pos + (rest.len() - rest.trim_start().len());
        if start >= self.text.len() {
            self.pos = start;
            return None;
        }
        let len = self.text[start..]
            .find(char::is_whitespace)
            .unwrap_or(self.text.len() - start);
        self.pos = start + len;
        Some((start, &self.text[start..start + len]))
    }

    fn skip_line(&mut self) {
        self.pos = self.text[self.pos..]
            .find('\n')
            .map_or(self.text.len(), |i| self.pos + i + 1);
    }

    fn expect(&mut self, word: &str) -> Result<usize> {
        match self.next() {
            Some((at, w)) if w == word => Ok(at),
            Some((at, w)) => Err(parse_err(at, format!("expected `{word}`, found `{w}`"))),
            None => Err(parse_err(
                self.pos,
                format!("expected `{word}`, found end of input"),
            )),
        }
    }

    fn number(&mut self) -> Result<f64> {
        let (at, w) = self
            .next()
            .ok_or_else(|| parse_err(self.pos, "expected a number, found end of input"))?;
        match w.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(parse_err(at, format!("malformed number `{w}`"))),
        }
    }
}

fn parse_ascii(bytes: &[u8]) -> Result<Vec<[Point3; 3]>> {
    let text = std::str::from_utf8(bytes)
        .map_err(|e| parse_err(e.valid_up_to(), "ASCII STL is not valid UTF-8"))?;
    let mut tokens = Tokens { text, pos: 0 };
    tokens.expect("solid")?;
    tokens.skip_line();
    let mut soup = Vec::new();
    loop {
        match tokens.next() {
            Some((_, "facet")) => {
                tokens.expect("normal")?;
                for _ in 0..3 {
                    tokens.number()?;
                }
                tokens.expect("outer")?;
                tokens.expect("loop")?;
                let mut tri = [[0.0; 3]; 3];
                for vertex in &mut tri {
                    tokens.expect("vertex")?;
                    for c in vertex.iter_mut() {
                        *c = tokens.number()?;
                    }
                }
                tokens.expect("endloop")?;
                tokens.expect("endfacet")?;
                soup.push(tri);
            }
            Some((_, "endsolid")) => return Ok(soup),
            Some((at, w)) => {
                return Err(parse_err(
                    at,
                    format!("expected `facet` or `endsolid`, found `{w}`"),
                ))
            }
            None => return Err(parse_err(text.len(), "missing `endsolid`")),
        }
    }
}

fn facet_normal([a, b, c]: [Point3; 3]) -> Point3 {
    use super::mesh::{cross, dot, sub};
    let n = cross(sub(b, a), sub(c, a));
    let len = dot(n, n).sqrt();
    if len > 0.0 {
        n.map(|v| v / len)
    } else {
        [0.0; 3]
    }
}

pub fn write_binary(mesh: &TriangleMesh) -> Vec<u8> {
    let n = mesh.triangles().len();
    let mut out = Vec::with_capacity(HEADER_LEN + 4 + FACET_LEN * n);
    let mut header = [0u8; HEADER_LEN];
    let tag = b"binary STL written by foamfab";
    header[..tag.len()].copy_from_slice(tag);
    out.extend_from_slice(&header);
    out.extend_from_slice(&(n as u32).to_le_bytes());
    for t in 0..n {
        let tri = mesh.triangle(t);
        for v in std::iter::once(facet_normal(tri)).chain(tri) {
            for c in v {
                out.extend_from_slice(&(c as f32).to_le_bytes());
            }
        }
        out.extend_from_slice(&0u16.to_le_bytes());
    }
    out
}

pub fn write_ascii(mesh: &TriangleMesh, name: &str) -> String {
    let mut out = format!("solid {name}\n");
    for t in 0..mesh.triangles().len() {
        let tri = mesh.triangle(t);
        let [nx, ny, nz] = facet_normal(tri);
        let _ = writeln!(out, "  facet normal {nx:e} {ny:e} {nz:e}\n    outer loop");
        for [x, y, z] in tri {
            let _ = writeln!(out, "      vertex {x:e} {y:e} {z:e}");
        }
        out.push_str("    endloop\n  endfacet\n");
    }
    let _ = writeln!(out, "endsolid {name}");
    out
}
