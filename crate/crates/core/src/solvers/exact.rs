use crate::error::Result;
use crate::expm::expm;
use crate::generator::{conditional_block_generator, Atom, ModelParams};
use crate::scalar::{re, CMatrix, Real};
use crate::superop::{from_offset_blocks, offset_blocks, OffsetBlock};

use super::{check_time, ConditionalPropagators, Method};

/// Exact transformers from the matrix exponential of the block generator,
/// one offset sector at a time.
///
/// Sector `k` couples the offset-`k` units of `X_g` with those of `X_e`, so
/// its coupled matrix has size `2(d − |k|)`.
#[derive(Debug, Clone)]
pub struct ExactSolver<T: Real> {
    params: ModelParams<T>,
    sectors: Vec<Sector<T>>,
}

#[derive(Debug, Clone)]
struct Sector<T: Real> {
    offset: isize,
    units: Vec<usize>,
    coupled: CMatrix<T>,
}

impl<T: Real> ExactSolver<T> {
    pub fn new(p: &ModelParams<T>) -> Result<Self> {
        let a = conditional_block_generator(p)?;
        let split = |r: usize, s: usize| offset_blocks(&a.blocks[r][s]);
        let (gg, ge, eg, ee) = (split(0, 0)?, split(0, 1)?, split(1, 0)?, split(1, 1)?);
        let sectors = (0..gg.len())
            .map(|i| {
                let n = gg[i].units.len();
                let mut coupled = CMatrix::zeros(2 * n, 2 * n);
                coupled.view_mut((0, 0), (n, n)).copy_from(&gg[i].matrix);
                coupled.view_mut((0, n), (n, n)).copy_from(&ge[i].matrix);
                coupled.view_mut((n, 0), (n, n)).copy_from(&eg[i].matrix);
                coupled.view_mut((n, n), (n, n)).copy_from(&ee[i].matrix);
                Sector { offset: gg[i].offset, units: gg[i].units.clone(), coupled }
            })
            .collect();
        Ok(Self { params: *p, sectors })
    }

    pub fn params(&self) -> &ModelParams<T> {
        &self.params
    }

    /// Transformers for both preparations at time `t`, indexed by
    /// [`Atom::index`].
    pub fn propagate_both(&self, t: T) -> Result<[ConditionalPropagators<T>; 2]> {
        check_time(t)?;
        let d = self.params.d;
        let mut parts: [[Vec<OffsetBlock<T>>; 2]; 2] = Default::default();
        for sec in &self.sectors {
            let n = sec.units.len();
            let e = expm(&(&sec.coupled * re(t)))?;
            for (r, row) in parts.iter_mut().enumerate() {
                for (i, out) in row.iter_mut().enumerate() {
                    out.push(OffsetBlock {
                        offset: sec.offset,
                        units: sec.units.clone(),
                        matrix: e.view((r * n, i * n), (n, n)).into_owned(),
                    });
                }
            }
        }
        let build = |i: usize, prepared: Atom| ConditionalPropagators {
            prepared,
            t,
            m_g: from_offset_blocks(d, &parts[0][i]),
            m_e: from_offset_blocks(d, &parts[1][i]),
            method: Method::Exact,
            order: 0,
            valid: true,
        };
        Ok([build(0, Atom::G), build(1, Atom::E)])
    }

    pub fn propagate(&self, prepared: Atom, t: T) -> Result<ConditionalPropagators<T>> {
        let [g, e] = self.propagate_both(t)?;
        Ok(match prepared {
            Atom::G => g,
            Atom::E => e,
        })
    }
}

/// Exact transformer pair for one preparation at time `t`.
pub fn exact_conditional<T: Real>(
    p: &ModelParams<T>,
    prepared: Atom,
    t: T,
) -> Result<ConditionalPropagators<T>> {
    ExactSolver::new(p)?.propagate(prepared, t)
}
