//! `AFCP` parameter checkpoints.
//!
//! Layout: magic `AFCP`, `u16` version (1), then the 13 tensors of [`PolicyParams::tensors`] in
//! order, each as `u32` rank, `rank × u32` dims, and the row-major little-endian `f64` payload.
//! `log_std` is a rank-0 tensor with a single value.

use std::path::Path;

use ndarray::{Array1, Array2};

use super::network::{Mlp, PolicyParams, TENSOR_COUNT};
use crate::binio::{put_f64s, put_u16, put_u32, Reader};
use crate::error::{Error, Result};

pub const CHECKPOINT_MAGIC: &[u8; 4] = b"AFCP";
const VERSION: u16 = 1;

pub fn write_checkpoint(params: &PolicyParams) -> Vec<u8> {
    let mut out = Vec::with_capacity(6 + params.parameter_count() * 8 + TENSOR_COUNT * 12);
    out.extend_from_slice(CHECKPOINT_MAGIC);
    put_u16(&mut out, VERSION);
    for (shape, data) in params.shapes().iter().zip(params.tensors()) {
        put_u32(&mut out, shape.len() as u32);
        for &d in shape {
            put_u32(&mut out, d as u32);
        }
        put_f64s(&mut out, data);
    }
    out
}

pub fn read_checkpoint(bytes: &[u8], path: &Path) -> Result<PolicyParams> {
    let mut r = Reader::new(bytes, path);
    r.expect_magic(CHECKPOINT_MAGIC)?;
    let version = r.u16("version")?;
    if version != VERSION {
        return Err(Error::format(
            path,
            4,
            format!("unsupported checkpoint version {version}"),
        ));
    }
    let mut tensors: Vec<(Vec<usize>, Vec<f64>)> = Vec::with_capacity(TENSOR_COUNT);
    for i in 0..TENSOR_COUNT {
        let rank = r.u32("tensor rank")? as usize;
        if rank > 2 {
            return Err(r.error(format!("tensor {i} has rank {rank}")));
        }
        let dims = (0..rank)
            .map(|_| r.u32("tensor dim").map(|d| d as usize))
            .collect::<Result<Vec<_>>>()?;
        let len = dims.iter().product::<usize>();
        let data = r.f64s(len, "tensor payload")?;
        tensors.push((dims, data));
    }
    if !r.remaining().is_empty() {
        return Err(r.error(format!("{} trailing bytes", r.remaining().len())));
    }

    let mut it = tensors.into_iter();
    let policy = take_mlp(&mut it, path)?;
    let (shape, data) = it.next().expect("13 tensors");
    if !shape.is_empty() {
        return Err(Error::format(path, 0, "log_std must be a rank-0 tensor"));
    }
    let log_std = data[0];
    let value = take_mlp(&mut it, path)?;
    let params = PolicyParams { policy, log_std, value };
    let expected = PolicyParams::zeros(params.obs_dim(), params.hidden_dim()).shapes();
    if params.shapes() != expected {
        return Err(Error::format(
            path,
            0,
            "tensor shapes are inconsistent with a two-hidden-layer network",
        ));
    }
    Ok(params)
}

fn take_mlp(it: &mut impl Iterator<Item = (Vec<usize>, Vec<f64>)>, path: &Path) -> Result<Mlp> {
    let matrix = |it: &mut dyn Iterator<Item = (Vec<usize>, Vec<f64>)>| -> Result<Array2<f64>> {
        let (shape, data) = it.next().expect("13 tensors");
        if shape.len() != 2 {
            return Err(Error::format(path, 0, "expected a rank-2 weight tensor"));
        }
        Array2::from_shape_vec((shape[0], shape[1]), data).map_err(|e| Error::format(path, 0, e.to_string()))
    };
    let vector = |it: &mut dyn Iterator<Item = (Vec<usize>, Vec<f64>)>| -> Result<Array1<f64>> {
        let (shape, data) = it.next().expect("13 tensors");
        if shape.len() != 1 {
            return Err(Error::format(path, 0, "expected a rank-1 bias tensor"));
        }
        Ok(Array1::from(data))
    };
    Ok(Mlp {
        w1: matrix(it)?,
        b1: vector(it)?,
        w2: matrix(it)?,
        b2: vector(it)?,
        w3: matrix(it)?,
        b3: vector(it)?,
    })
}

pub fn save_checkpoint(path: &Path, params: &PolicyParams) -> Result<()> {
    std::fs::write(path, write_checkpoint(params)).map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint(path: &Path) -> Result<PolicyParams> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    read_checkpoint(&bytes, path)
}
