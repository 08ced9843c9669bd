use std::collections::BTreeMap;

use super::{EdgeRef, GraphPoint, MetricGraph, VertexId};
use crate::error::Result;

/// Shortest-path distance between two points of the graph.
pub(super) fn graph_distance(g: &MetricGraph, x: GraphPoint, y: GraphPoint) -> Result<f64> {
    g.check_point(x)?;
    g.check_point(y)?;
    let index: BTreeMap<VertexId, usize> =
        g.vertices().iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let n = index.len();
    let mut d = vec![vec![f64::INFINITY; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0.0;
    }
    for e in g.internal_edges() {
        let (a, b) = (index[&e.from], index[&e.to]);
        d[a][b] = d[a][b].min(e.length);
        d[b][a] = d[b][a].min(e.length);
    }
    for m in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i][m] + d[m][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }

    let exits = |p: GraphPoint| -> Result<Vec<(usize, f64)>> {
        Ok(match g.edge_ref(p.edge)? {
            EdgeRef::Internal(i) => {
                let e = g.internal_edges()[i];
                vec![(index[&e.from], p.x), (index[&e.to], e.length - p.x)]
            }
            EdgeRef::External(i) => vec![(index[&g.external_edges()[i].at], p.x)],
        })
    };

    let mut best = if x.edge == y.edge { (x.x - y.x).abs() } else { f64::INFINITY };
    for (a, da) in exits(x)? {
        for &(b, db) in &exits(y)? {
            best = best.min(da + d[a][b] + db);
        }
    }
    Ok(best)
}
