//! Packed float container for the full buffer set of one frame.
//!
//! Layout, all integers little-endian:
//!   magic "G2RB" (4 bytes), version u16, buffer count u16,
//!   width u32, height u32,
//!   then per buffer: id u8, channels u8,
//!   then per buffer (same order): width*height*channels f32 samples,
//!   interleaved pixel-major exactly as held in memory.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use g2r_core::{GBufferId, GBufferSet, ImagePlane, Precision};

use crate::error::DatagenError;

pub const CONTAINER_MAGIC: [u8; 4] = *b"G2RB";
pub const CONTAINER_VERSION: u16 = 1;

pub fn write_container(set: &GBufferSet, out: &mut impl Write) -> std::io::Result<()> {
    out.write_all(&CONTAINER_MAGIC)?;
    out.write_all(&CONTAINER_VERSION.to_le_bytes())?;
    let count = set.iter().count() as u16;
    out.write_all(&count.to_le_bytes())?;
    out.write_all(&set.width().to_le_bytes())?;
    out.write_all(&set.height().to_le_bytes())?;
    for (id, plane) in set.iter() {
        out.write_all(&[id.code(), plane.channels()])?;
    }
    for (_, plane) in set.iter() {
        let mut bytes = Vec::with_capacity(plane.data().len() * 4);
        for &v in plane.data() {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        out.write_all(&bytes)?;
    }
    Ok(())
}

fn read_exact_or(
    input: &mut impl Read,
    buf: &mut [u8],
    what: &str,
) -> Result<(), DatagenError> {
    input
        .read_exact(buf)
        .map_err(|e| DatagenError::BadContainer(format!("truncated reading {what}: {e}")))
}

/// Read a container back; returns dimensions and the decoded planes.
pub fn read_container(
    input: &mut impl Read,
) -> Result<(u32, u32, BTreeMap<GBufferId, ImagePlane>), DatagenError> {
    let mut magic = [0u8; 4];
    read_exact_or(input, &mut magic, "magic")?;
    if magic != CONTAINER_MAGIC {
        return Err(DatagenError::BadContainer(format!(
            "bad magic {magic:02x?}"
        )));
    }
    let mut u16_buf = [0u8; 2];
    read_exact_or(input, &mut u16_buf, "version")?;
    let version = u16::from_le_bytes(u16_buf);
    if version != CONTAINER_VERSION {
        return Err(DatagenError::BadContainer(format!(
            "unsupported version {version}"
        )));
    }
    read_exact_or(input, &mut u16_buf, "buffer count")?;
    let count = u16::from_le_bytes(u16_buf);
    let mut u32_buf = [0u8; 4];
    read_exact_or(input, &mut u32_buf, "width")?;
    let width = u32::from_le_bytes(u32_buf);
    read_exact_or(input, &mut u32_buf, "height")?;
    let height = u32::from_le_bytes(u32_buf);
    if width == 0 || height == 0 {
        return Err(DatagenError::BadContainer(format!(
            "zero dimension {width}x{height}"
        )));
    }

    let mut descriptors = Vec::with_capacity(count as usize);
    for _ in 0..count {
        let mut pair = [0u8; 2];
        read_exact_or(input, &mut pair, "buffer descriptor")?;
        let id = GBufferId::from_code(pair[0]).ok_or_else(|| {
            DatagenError::BadContainer(format!("unknown buffer code {}", pair[0]))
        })?;
        descriptors.push((id, pair[1]));
    }

    let mut planes = BTreeMap::new();
    for (id, channels) in descriptors {
        let samples = width as usize * height as usize * channels as usize;
        let mut bytes = vec![0u8; samples * 4];
        read_exact_or(input, &mut bytes, "plane data")?;
        let data: Vec<f32> = bytes
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
            .collect();
        let plane = ImagePlane::new(width, height, channels, Precision::F32, data)?;
        if planes.insert(id, plane).is_some() {
            return Err(DatagenError::BadContainer(format!(
                "duplicate buffer {id:?}"
            )));
        }
    }
    Ok((width, height, planes))
}
