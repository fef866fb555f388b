//! Real (spherical) blow-up of a submanifold inside a block manifold.
//!
//! Blowing up replaces the centre by the sphere of normal directions: polar
//! coordinates around the centre become ordinary coordinates of the blown-up
//! space. For a slice `{x_{i_1} = … = x_{i_n} = 0}` of line coordinates the
//! front face is a full sphere `S^{n-1}`; for a corner face (vanishing
//! half-line coordinates) it is the non-negative part of the sphere.

use crate::geometry::factor::{Factor, ModelBlock};
use crate::geometry::manifold::CoordinateManifold;
use crate::geometry::map::SmoothMap;
use crate::jet::{self, Jet};
use crate::{Error, Result};

/// The centre of a blow-up, inside a single-block manifold.
#[derive(Clone, Debug)]
pub enum SubmanifoldSpec {
    /// `{x_i = 0 : i ∈ zeroed}` where every index is a line coordinate.
    LinearSlice { zeroed: Vec<usize> },
    /// A corner face `{x_i = 0 : i ∈ faces}` of half-line coordinates.
    CornerFace { faces: Vec<usize> },
}

impl SubmanifoldSpec {
    fn indices(&self) -> &[usize] {
        match self {
            SubmanifoldSpec::LinearSlice { zeroed } => zeroed,
            SubmanifoldSpec::CornerFace { faces } => faces,
        }
    }
}

/// Result of [`blow_up`].
#[derive(Clone, Debug)]
pub struct BlowUpData {
    pub ambient: CoordinateManifold,
    pub center: SubmanifoldSpec,
    /// The blown-up space: front-face sphere factor first, then the radial
    /// half-line coordinate, then the kept ambient factors in their original
    /// order.
    pub total: CoordinateManifold,
    /// Projection back to the ambient space (`ρ·θ` into the centre slots).
    pub blow_down: SmoothMap,
    /// Section of `blow_down` defined away from the centre (polar
    /// coordinates); smooth where the radius is positive.
    pub polar_lift: SmoothMap,
    /// Defining function of the front face, as a map to `[0, ∞)`.
    pub radius: SmoothMap,
    /// Embedded index of the radial coordinate in the total-space block.
    pub radius_index: usize,
}

/// Blow up `center` inside the single-block manifold `ambient`.
pub fn blow_up(ambient: &CoordinateManifold, center: &SubmanifoldSpec) -> Result<BlowUpData> {
    if ambient.blocks.len() != 1 {
        return Err(Error::Unsupported(format!(
            "blow-up needs a single-block ambient manifold, {} has {} blocks",
            ambient.name,
            ambient.blocks.len()
        )));
    }
    let block = &ambient.blocks[0];
    let idx = center.indices();
    if idx.is_empty() {
        return Err(Error::Shape("blow-up centre selects no coordinates".into()));
    }
    let mut sorted = idx.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != idx.len() {
        return Err(Error::Shape("blow-up centre repeats a coordinate".into()));
    }

    // The centre must consist of whole scalar factors of the right kind.
    let mut factor_of = vec![None; block.embedded_dim()];
    for (f, o) in block.spans() {
        for i in o..o + f.embedded_dim() {
            factor_of[i] = Some((f, o));
        }
    }
    for &i in &sorted {
        match (center, factor_of.get(i).copied().flatten()) {
            (SubmanifoldSpec::LinearSlice { .. }, Some((Factor::Line, _))) => {}
            (SubmanifoldSpec::CornerFace { .. }, Some((Factor::Half, _))) => {}
            _ => {
                return Err(Error::Unsupported(format!(
                    "blow-up centre coordinate {i} is not a whole factor of the expected kind"
                )))
            }
        }
    }

    let n = sorted.len();
    let front = match center {
        SubmanifoldSpec::LinearSlice { .. } => Factor::Sphere(n - 1),
        SubmanifoldSpec::CornerFace { .. } => Factor::ClippedSphere(n - 1),
    };
    let kept: Vec<(usize, Factor)> = block
        .spans()
        .filter(|(_, o)| !sorted.contains(o))
        .map(|(f, o)| (o, f))
        .collect();
    let mut total_factors = vec![front, Factor::Half];
    total_factors.extend(kept.iter().map(|(_, f)| *f));
    let total = CoordinateManifold::single(
        format!("[{}:{:?}]", ambient.name, sorted),
        ModelBlock::new(total_factors),
    );

    let radius_index = n;
    // Embedded offsets of the kept coordinates in the ambient block, in the
    // order they appear in the total space after (θ, ρ).
    let kept_spans: Vec<(usize, usize)> =
        kept.iter().map(|(o, f)| (*o, f.embedded_dim())).collect();
    let ambient_embedded = block.embedded_dim();

    let sorted_down = sorted.clone();
    let kept_down = kept_spans.clone();
    let blow_down = SmoothMap::from_fn(total.clone(), ambient.clone(), move |_, j| {
        let rho = &j[radius_index];
        let mut out = vec![Jet::zero(); ambient_embedded];
        for (s, &i) in sorted_down.iter().enumerate() {
            out[i] = rho * &j[s];
        }
        let mut pos = radius_index + 1;
        for &(o, len) in &kept_down {
            for t in 0..len {
                out[o + t] = j[pos + t].clone();
            }
            pos += len;
        }
        Ok((0, out))
    });

    let sorted_up = sorted.clone();
    let kept_up = kept_spans.clone();
    let total_embedded = total.blocks[0].embedded_dim();
    let polar_lift = SmoothMap::from_fn(ambient.clone(), total.clone(), move |_, j| {
        let v: Vec<Jet> = sorted_up.iter().map(|&i| j[i].clone()).collect();
        let r = jet::norm(&v);
        if r.v <= 0.0 {
            return Err(Error::Constraint(
                "polar lift evaluated on the blow-up centre".into(),
            ));
        }
        let mut out = Vec::with_capacity(total_embedded);
        for x in &v {
            out.push(x / &r);
        }
        out.push(r);
        for &(o, len) in &kept_up {
            out.extend(j[o..o + len].iter().cloned());
        }
        Ok((0, out))
    });

    let radius = SmoothMap::from_fn(total.clone(), CoordinateManifold::halfline(), move |_, j| {
        Ok((0, vec![j[radius_index].clone()]))
    });

    Ok(BlowUpData {
        ambient: ambient.clone(),
        center: center.clone(),
        total,
        blow_down,
        polar_lift,
        radius,
        radius_index,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::manifold::Point;
    use crate::geometry::ops::depth;
    use crate::geometry::sample::{sample_points, SamplePlan};

    #[test]
    fn slice_blowup_round_trips_off_center() {
        // Blow up {x0 = x1 = 0} in R^3.
        let ambient = CoordinateManifold::euclidean(3);
        let data = blow_up(&ambient, &SubmanifoldSpec::LinearSlice { zeroed: vec![0, 1] })
            .unwrap();
        assert_eq!(data.total.dim(), 3);
        assert_eq!(data.radius_index, 2);

        let x = Point::flat(vec![0.3, -0.4, 2.0]);
        let up = data.polar_lift.eval_point(&x).unwrap();
        data.total.check_point(&up, 1e-12).unwrap();
        assert!((up.coords[2] - 0.5).abs() < 1e-15);
        let back = data.blow_down.eval_point(&up).unwrap();
        for (a, b) in back.coords.iter().zip(&x.coords) {
            assert!((a - b).abs() < 1e-15);
        }

        // Front-face points blow down to the centre.
        let ff = Point::flat(vec![0.6, 0.8, 0.0, -1.3]);
        assert_eq!(depth(&data.total, &ff), 1);
        let down = data.blow_down.eval_point(&ff).unwrap();
        assert_eq!(down.coords[0], 0.0);
        assert_eq!(down.coords[1], 0.0);
        assert_eq!(down.coords[2], -1.3);
    }

    #[test]
    fn codimension_one_slice_gives_two_point_front() {
        let ambient = CoordinateManifold::euclidean(2);
        let data =
            blow_up(&ambient, &SubmanifoldSpec::LinearSlice { zeroed: vec![0] }).unwrap();
        assert_eq!(data.total.blocks[0].factors[0], Factor::Sphere(0));
        let up = data.polar_lift.eval_point(&Point::flat(vec![-0.7, 1.1])).unwrap();
        assert_eq!(up.coords[0], -1.0);
        assert!((up.coords[1] - 0.7).abs() < 1e-15);
    }

    #[test]
    fn corner_face_blowup_uses_clipped_sphere() {
        let ambient = CoordinateManifold::single(
            "H^2xL",
            ModelBlock::new(vec![Factor::Half, Factor::Half, Factor::Line]),
        );
        let data =
            blow_up(&ambient, &SubmanifoldSpec::CornerFace { faces: vec![0, 1] }).unwrap();
        assert_eq!(data.total.blocks[0].factors[0], Factor::ClippedSphere(1));
        for p in sample_points(&data.total, &SamplePlan::new(11, 40)) {
            let down = data.blow_down.eval_point(&p).unwrap();
            ambient.check_point(&down, 1e-12).unwrap();
            if p.coords[data.radius_index] > 0.0 {
                let up = data.polar_lift.eval_point(&down).unwrap();
                for (a, b) in up.coords.iter().zip(&p.coords) {
                    assert!((a - b).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn blowing_up_sphere_coordinates_is_rejected() {
        let ambient = CoordinateManifold::single(
            "S^2",
            ModelBlock::new(vec![Factor::Sphere(2)]),
        );
        assert!(blow_up(&ambient, &SubmanifoldSpec::LinearSlice { zeroed: vec![0] }).is_err());
    }
}
