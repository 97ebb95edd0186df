use super::energy::material_frames;
use super::frame::{curvature_binormal, signed_angle, transport_vector};
use super::state::{NaturalShape, RodState, Stiffness};
use crate::{Result, Vec3};

/// Gradient of the strain energy with respect to node positions and twist
/// angles, holding the reference frames time-parallel transported.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ElasticGradient {
    /// `dE/dx_i` for every node [N].
    pub positions: Vec<Vec3>,
    /// `dE/dphi^j` for every edge [N m].
    pub twist: Vec<f64>,
}

/// Evaluates both gradients in one sweep over the interior nodes.
///
/// Per interior node `i` with incoming edge `e = e^{i-1}` and outgoing edge
/// `f = e^i`, and `chi = 1 + t_e . t_f`, `t~ = (t_e + t_f)/chi`,
/// `d~_k = (d_k^e + d_k^f)/chi`:
///
/// ```text
/// dk1/de = (-k1 t~ + t_f x d~2)/|e|    dk1/df = (-k1 t~ - t_e x d~2)/|f|
/// dk2/de = (-k2 t~ - t_f x d~1)/|e|    dk2/df = (-k2 t~ + t_e x d~1)/|f|
/// dm/de  = kb/(2|e|)                   dm/df  = kb/(2|f|)
/// ```
///
/// where `m` is the reference twist. The frame variation under a tangent
/// change is the first-order parallel transport, so these are exact
/// derivatives of [`super::energy::total_energy`] at the current state.
pub fn elastic_gradient(
    state: &RodState,
    nat: &NaturalShape,
    k: &Stiffness,
) -> Result<ElasticGradient> {
    nat.check_compatible(state)?;
    let n = state.node_count();
    let mut grad = vec![Vec3::zeros(); n];
    let mut twist = vec![0.0; n - 1];

    let edges: Vec<Vec3> = (0..n - 1).map(|j| state.edge(j)).collect();
    let lengths: Vec<f64> = edges.iter().map(|e| e.norm()).collect();

    for (j, (&rest, &len)) in nat.rest_edge_lengths.iter().zip(&lengths).enumerate() {
        let g = edges[j] * (k.stretch * (len / rest - 1.0) / len);
        grad[j] -= g;
        grad[j + 1] += g;
    }

    let frames = material_frames(state);
    let refs = &state.ref_frames;
    for i in 1..n - 1 {
        let (fe, ff) = (&frames[i - 1], &frames[i]);
        let (te, tf) = (&fe.d3, &ff.d3);
        let (le, lf) = (lengths[i - 1], lengths[i]);
        let kb = curvature_binormal(te, tf)?;
        let chi = 1.0 + te.dot(tf);
        let t_tilde = (te + tf) / chi;
        let d1_tilde = (fe.d1 + ff.d1) / chi;
        let d2_tilde = (fe.d2 + ff.d2) / chi;
        let k1 = 0.5 * (fe.d2 + ff.d2).dot(&kb);
        let k2 = -0.5 * (fe.d1 + ff.d1).dot(&kb);

        let dk1_de = (-t_tilde * k1 + tf.cross(&d2_tilde)) / le;
        let dk1_df = (-t_tilde * k1 - te.cross(&d2_tilde)) / lf;
        let dk2_de = (-t_tilde * k2 - tf.cross(&d1_tilde)) / le;
        let dk2_df = (-t_tilde * k2 + te.cross(&d1_tilde)) / lf;

        let vor = nat.voronoi_lengths[i - 1];
        let [r1, r2] = nat.rest_curvatures[i - 1];
        let cb = k.bend / vor;
        let (dk1, dk2) = (k1 - r1, k2 - r2);

        let mut de = (dk1_de * dk1 + dk2_de * dk2) * cb;
        let mut df = (dk1_df * dk1 + dk2_df * dk2) * cb;

        // dk1/dphi = -d1 . kb / 2, dk2/dphi = -d2 . kb / 2 for either edge.
        twist[i - 1] += -0.5 * cb * (dk1 * fe.d1.dot(&kb) + dk2 * fe.d2.dot(&kb));
        twist[i] += -0.5 * cb * (dk1 * ff.d1.dot(&kb) + dk2 * ff.d2.dot(&kb));

        let u = transport_vector(&refs[i - 1].d3, &refs[i].d3, &refs[i - 1].d1)?;
        let m = signed_angle(&u, &refs[i].d1, &refs[i].d3);
        let tau = state.twist_angles[i] - state.twist_angles[i - 1] + m;
        let ct = k.twist / vor * (tau - nat.rest_twists[i - 1]);
        twist[i] += ct;
        twist[i - 1] -= ct;
        de += kb * (ct / (2.0 * le));
        df += kb * (ct / (2.0 * lf));

        grad[i - 1] -= de;
        grad[i] += de - df;
        grad[i + 1] += df;
    }

    Ok(ElasticGradient {
        positions: grad,
        twist,
    })
}

/// Internal elastic force on every node, `-dE/dX`.
pub fn force_gradient(state: &RodState, nat: &NaturalShape, k: &Stiffness) -> Result<Vec<Vec3>> {
    let g = elastic_gradient(state, nat, k)?;
    Ok(g.positions.into_iter().map(|v| -v).collect())
}

/// Twisting moment gradient `dE/dPhi` for every edge.
pub fn twist_moment_gradient(
    state: &RodState,
    nat: &NaturalShape,
    k: &Stiffness,
) -> Result<Vec<f64>> {
    Ok(elastic_gradient(state, nat, k)?.twist)
}
