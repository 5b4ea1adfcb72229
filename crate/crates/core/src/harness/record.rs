//! Binary trial records: everything random in a trial (channel, symbols,
//! noise) plus its seed, so a trial can be replayed bit-exactly.
//!
//! Layout (little endian): magic `MMCF`, u16 version, u8 kind, u64 trial
//! seed, f64 SNR, u16 QAM order, then a kind-specific payload of u32
//! dimensions, f64 values and u8 symbol indices.

use std::io::{Cursor, Read};
use std::path::Path;

use byteorder::{LittleEndian as LE, ReadBytesExt, WriteBytesExt};
use nalgebra::DMatrix;
use num_complex::Complex64;

use super::sweep::{SweepPlan, TrialInstance, TrialOutcome};
use crate::chanest::{Frame, FrameConfig};
use crate::cpsc::{CpscConfig, CpscFrame, FreqSelChannel};
use crate::error::{Error, Result};
use crate::system::{ComplexChannel, FlatObservation, ModAlphabet};

pub const MAGIC: &[u8; 4] = b"MMCF";
pub const VERSION: u16 = 1;

const KIND_FLAT: u8 = 0;
const KIND_FRAME: u8 = 1;
const KIND_CPSC: u8 = 2;

#[derive(Clone, Debug)]
pub struct FrameRecord {
    pub trial_seed: u64,
    pub snr_db: f64,
    pub order: usize,
    /// Tap powers, CPSC only.
    pub omega2: Vec<f64>,
    pub instance: TrialInstance,
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Record(msg.into())
}

fn put_u32(buf: &mut Vec<u8>, v: usize) {
    buf.write_u32::<LE>(v as u32).unwrap();
}

fn put_f64s<'a>(buf: &mut Vec<u8>, vals: impl IntoIterator<Item = &'a f64>) {
    for v in vals {
        buf.write_f64::<LE>(*v).unwrap();
    }
}

fn put_c64s<'a>(buf: &mut Vec<u8>, vals: impl IntoIterator<Item = &'a Complex64>) {
    for v in vals {
        buf.write_f64::<LE>(v.re).unwrap();
        buf.write_f64::<LE>(v.im).unwrap();
    }
}

/// Column-major complex matrix.
fn put_cmat(buf: &mut Vec<u8>, m: &DMatrix<Complex64>) {
    put_c64s(buf, m.iter());
}

struct Reader<'a>(Cursor<&'a [u8]>);

impl Reader<'_> {
    fn u32(&mut self) -> Result<usize> {
        self.0.read_u32::<LE>().map(|v| v as usize).map_err(|_| bad("truncated record"))
    }

    fn f64(&mut self) -> Result<f64> {
        self.0.read_f64::<LE>().map_err(|_| bad("truncated record"))
    }

    fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        self.check(n, 8)?;
        (0..n).map(|_| self.f64()).collect()
    }

    fn c64s(&mut self, n: usize) -> Result<Vec<Complex64>> {
        self.check(n, 16)?;
        (0..n).map(|_| Ok(Complex64::new(self.f64()?, self.f64()?))).collect()
    }

    fn cmat(&mut self, rows: usize, cols: usize) -> Result<DMatrix<Complex64>> {
        let n = rows.checked_mul(cols).ok_or_else(|| bad("matrix too large"))?;
        Ok(DMatrix::from_vec(rows, cols, self.c64s(n)?))
    }

    fn bytes(&mut self, n: usize) -> Result<Vec<u8>> {
        self.check(n, 1)?;
        let mut v = vec![0u8; n];
        self.0.read_exact(&mut v).map_err(|_| bad("truncated record"))?;
        Ok(v)
    }

    /// Guards allocations against lengths larger than the remaining input.
    fn check(&self, n: usize, width: usize) -> Result<()> {
        let left = self.0.get_ref().len() as u64 - self.0.position();
        match n.checked_mul(width) {
            Some(b) if b as u64 <= left => Ok(()),
            _ => Err(bad("truncated record")),
        }
    }
}

fn put_channel(buf: &mut Vec<u8>, ch: &ComplexChannel) {
    put_u32(buf, ch.antennas());
    put_u32(buf, ch.users());
    put_f64s(buf, &ch.powers);
    put_cmat(buf, &ch.h);
}

fn get_channel(r: &mut Reader) -> Result<ComplexChannel> {
    let n = r.u32()?;
    let k = r.u32()?;
    let powers = r.f64s(k)?;
    let h = r.cmat(n, k)?;
    Ok(ComplexChannel { h, powers })
}

fn check_symbols(data: &[u8], alphabet: &ModAlphabet) -> Result<()> {
    if data.iter().any(|&d| d as usize >= alphabet.size()) {
        return Err(bad("symbol index outside the alphabet"));
    }
    Ok(())
}

impl FrameRecord {
    /// Regenerates trial `trial` of SNR point `snr_idx` of a sweep.
    pub fn capture(plan: &SweepPlan, snr_idx: usize, trial: u64) -> Result<Self> {
        let snr_db = *plan
            .config
            .snr_db
            .get(snr_idx)
            .ok_or_else(|| Error::invalid("snr_index", "outside the SNR grid"))?;
        let trial_seed = plan.trial_seed(snr_idx, trial);
        Ok(Self {
            trial_seed,
            snr_db,
            order: plan.alphabet.order(),
            omega2: plan.cpsc.as_ref().map(|c| c.omega2.clone()).unwrap_or_default(),
            instance: plan.generate(snr_db, trial_seed)?,
        })
    }

    /// Runs the receiver of `plan` on the recorded trial.
    pub fn replay(&self, plan: &SweepPlan) -> Result<TrialOutcome> {
        plan.evaluate(&self.instance, self.trial_seed)
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        buf.extend_from_slice(MAGIC);
        buf.write_u16::<LE>(VERSION).unwrap();
        let kind = match self.instance {
            TrialInstance::Flat { .. } => KIND_FLAT,
            TrialInstance::Frame(_) => KIND_FRAME,
            TrialInstance::Cpsc(_) => KIND_CPSC,
        };
        buf.push(kind);
        buf.write_u64::<LE>(self.trial_seed).unwrap();
        buf.write_f64::<LE>(self.snr_db).unwrap();
        buf.write_u16::<LE>(self.order as u16).unwrap();
        match &self.instance {
            TrialInstance::Flat { channel, obs } => {
                buf.write_f64::<LE>(obs.system.sigma2).unwrap();
                put_channel(&mut buf, channel);
                buf.extend_from_slice(&obs.tx);
                put_f64s(&mut buf, &obs.noise);
            }
            TrialInstance::Frame(frame) => {
                buf.write_f64::<LE>(frame.sigma2).unwrap();
                put_channel(&mut buf, &frame.channel);
                put_u32(&mut buf, frame.data.len());
                for col in &frame.data {
                    buf.extend_from_slice(col);
                }
                put_u32(&mut buf, frame.noise.ncols());
                put_cmat(&mut buf, &frame.noise);
            }
            TrialInstance::Cpsc(frame) => {
                let ch = &frame.channel;
                buf.write_f64::<LE>(frame.sigma2).unwrap();
                put_u32(&mut buf, ch.n);
                put_u32(&mut buf, ch.k);
                put_u32(&mut buf, ch.l);
                put_f64s(&mut buf, &self.omega2);
                put_c64s(&mut buf, &ch.taps);
                put_u32(&mut buf, frame.data.len());
                put_u32(&mut buf, frame.data.first().map_or(0, Vec::len) / (2 * ch.k));
                for block in &frame.data {
                    buf.extend_from_slice(block);
                }
                put_cmat(&mut buf, &frame.pilot_noise);
                for b in &frame.block_noise {
                    put_cmat(&mut buf, b);
                }
            }
        }
        buf
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 4 || &bytes[..4] != MAGIC {
            return Err(bad("missing MMCF magic"));
        }
        let mut r = Reader(Cursor::new(bytes));
        r.0.set_position(4);
        let version = r.0.read_u16::<LE>().map_err(|_| bad("truncated record"))?;
        if version != VERSION {
            return Err(bad(format!("unsupported version {version}")));
        }
        let kind = r.0.read_u8().map_err(|_| bad("truncated record"))?;
        let trial_seed = r.0.read_u64::<LE>().map_err(|_| bad("truncated record"))?;
        let snr_db = r.f64()?;
        let order = r.0.read_u16::<LE>().map_err(|_| bad("truncated record"))? as usize;
        let alphabet = ModAlphabet::new(order)?;
        let sigma2 = r.f64()?;
        let mut omega2 = Vec::new();
        let instance = match kind {
            KIND_FLAT => {
                let channel = get_channel(&mut r)?;
                let tx = r.bytes(2 * channel.users())?;
                let noise = r.f64s(2 * channel.antennas())?;
                check_symbols(&tx, &alphabet)?;
                let obs = FlatObservation::from_parts(&channel, &alphabet, sigma2, tx, noise)?;
                TrialInstance::Flat { channel, obs }
            }
            KIND_FRAME => {
                let channel = get_channel(&mut r)?;
                let (n, k) = (channel.antennas(), channel.users());
                let cols = r.u32()?;
                if k == 0 || cols % k != 0 {
                    return Err(bad("data columns are not a whole number of blocks"));
                }
                let data = (0..cols).map(|_| r.bytes(2 * k)).collect::<Result<Vec<_>>>()?;
                data.iter().try_for_each(|d| check_symbols(d, &alphabet))?;
                let len = r.u32()?;
                let noise = r.cmat(n, len)?;
                let cfg = FrameConfig::new(k, n, cols / k, alphabet)?;
                TrialInstance::Frame(Frame::from_parts(&cfg, channel, sigma2, data, noise)?)
            }
            KIND_CPSC => {
                let (n, k, l) = (r.u32()?, r.u32()?, r.u32()?);
                omega2 = r.f64s(l)?;
                let taps = r.c64s(n * k * l)?;
                let (q, i) = (r.u32()?, r.u32()?);
                let data = (0..q).map(|_| r.bytes(2 * k * i)).collect::<Result<Vec<_>>>()?;
                data.iter().try_for_each(|d| check_symbols(d, &alphabet))?;
                let pilot_noise = r.cmat(n, k * l)?;
                let block_noise = (0..q)
                    .map(|_| r.cmat(n, (i + l).saturating_sub(1)))
                    .collect::<Result<Vec<_>>>()?;
                let cfg = CpscConfig::new(k, n, l, i, q, omega2.clone(), alphabet)?;
                let channel = FreqSelChannel::new(n, k, l, taps)?;
                TrialInstance::Cpsc(CpscFrame::from_parts(&cfg, channel, sigma2, data, pilot_noise, block_noise)?)
            }
            other => return Err(bad(format!("unknown record kind {other}"))),
        };
        if (r.0.position() as usize) != bytes.len() {
            return Err(bad("trailing bytes after record"));
        }
        Ok(Self {
            trial_seed,
            snr_db,
            order,
            omega2,
            instance,
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.encode()).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::decode(&bytes)
    }
}
