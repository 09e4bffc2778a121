//! JSON documents for distances, sequences and agreement witnesses, and
//! readers that rebuild witnesses for re-verification.
//!
//! Vertex and edge ids refer to the networks as parsed. Sequences carry
//! their start network explicitly so operations replay on the same ids.

use std::sync::Arc;

use serde_json::{json, Map, Value};

use crate::agreement::{
    AgreementCertificate, AgreementDistance, AgreementEmbedding, AgreementGraph,
};
use crate::canonical::CanonicalKey;
use crate::distances::{DistanceResult, RearrangementSequence, Step, Witness};
use crate::graph::{EdgeId, Label, VertexId};
use crate::network::PhyloNetwork;
use crate::pruned::PrunedGraph;
use crate::rearrangement::{OpSet, RearrangementOp};
use crate::taxa::{TaxaSet, ROOT_LABEL};

fn label_json(taxa: &TaxaSet, l: Option<Label>) -> Value {
    match l {
        None => Value::Null,
        Some(Label::Root) => json!(ROOT_LABEL),
        Some(Label::Taxon(t)) => json!(taxa.label(t)),
    }
}

fn label_from(taxa: &TaxaSet, v: &Value) -> Result<Option<Label>, String> {
    match v {
        Value::Null => Ok(None),
        Value::String(s) if s == ROOT_LABEL => Ok(Some(Label::Root)),
        Value::String(s) => taxa
            .index_of(s)
            .map(|t| Some(Label::Taxon(t)))
            .ok_or_else(|| format!("unknown taxon '{s}'")),
        _ => Err("label must be a string or null".into()),
    }
}

fn network_json(n: &PhyloNetwork) -> Value {
    json!({
        "enewick": crate::newick::write_enewick(n),
        "labels": n.vertices().map(|v| label_json(n.taxa(), n.label(v))).collect::<Vec<_>>(),
        "edges": n.edges().map(|e| {
            let (a, b) = n.endpoints(e);
            [a.0, b.0]
        }).collect::<Vec<_>>(),
    })
}

fn field<'a>(v: &'a Value, k: &str) -> Result<&'a Value, String> {
    v.get(k).ok_or_else(|| format!("missing field '{k}'"))
}

fn uint(v: &Value, k: &str) -> Result<u32, String> {
    field(v, k)?
        .as_u64()
        .map(|x| x as u32)
        .ok_or_else(|| format!("field '{k}' is not an unsigned integer"))
}

fn array<'a>(v: &'a Value, k: &str) -> Result<&'a Vec<Value>, String> {
    field(v, k)?
        .as_array()
        .ok_or_else(|| format!("field '{k}' is not an array"))
}

fn pairs(v: &Value, k: &str) -> Result<Vec<(u32, u32)>, String> {
    array(v, k)?
        .iter()
        .map(|p| match p.as_array().map(|a| a.as_slice()) {
            Some([a, b]) => match (a.as_u64(), b.as_u64()) {
                (Some(a), Some(b)) => Ok((a as u32, b as u32)),
                _ => Err(format!("bad pair in '{k}'")),
            },
            _ => Err(format!("bad pair in '{k}'")),
        })
        .collect()
}

fn network_from(taxa: &Arc<TaxaSet>, v: &Value) -> Result<PhyloNetwork, String> {
    let labels = array(v, "labels")?
        .iter()
        .map(|l| label_from(taxa, l))
        .collect::<Result<Vec<_>, _>>()?;
    let edges = pairs(v, "edges")?;
    PhyloNetwork::new(taxa.clone(), labels, edges).map_err(|e| e.to_string())
}

/// `{"ops", "start", "steps": [{"op", "key"}], "end"}` with the start
/// network given by eNewick, labels and edges.
pub fn sequence_json(seq: &RearrangementSequence) -> Value {
    json!({
        "ops": seq.ops,
        "start": network_json(&seq.start),
        "steps": seq.steps.iter().map(|s| json!({"op": s.op, "key": s.key})).collect::<Vec<_>>(),
        "end": seq.end,
    })
}

pub fn sequence_from_json(v: &Value, taxa: &Arc<TaxaSet>) -> Result<RearrangementSequence, String> {
    let ops: OpSet = serde_json::from_value(field(v, "ops")?.clone()).map_err(|e| e.to_string())?;
    let start = network_from(taxa, field(v, "start")?)?;
    let key = |x: &Value| {
        x.as_str()
            .and_then(CanonicalKey::from_hex)
            .ok_or_else(|| "bad canonical key".to_string())
    };
    let steps = array(v, "steps")?
        .iter()
        .map(|s| {
            let op: RearrangementOp =
                serde_json::from_value(field(s, "op")?.clone()).map_err(|e| e.to_string())?;
            Ok(Step {
                op,
                key: key(field(s, "key")?)?,
            })
        })
        .collect::<Result<Vec<_>, String>>()?;
    Ok(RearrangementSequence {
        start,
        steps,
        ops,
        end: key(field(v, "end")?)?,
    })
}

fn embedding_json(e: &AgreementEmbedding, to_graph: &[u32]) -> Value {
    let mut rows: Vec<(u32, Value)> = e
        .edge_map
        .iter()
        .enumerate()
        .map(|(f, path)| {
            let id = to_graph[f];
            (id, json!({"guest_edge": id, "host_edges": path}))
        })
        .collect();
    rows.sort_by_key(|r| r.0);
    Value::Array(rows.into_iter().map(|r| r.1).collect())
}

/// `{"d", "s", "l", "components", "embedding_N", "embedding_Nprime"}`.
///
/// Each component lists its vertices (`id`, `label`) and edges (`id`,
/// `tail`, `head`); disagreement edges carry `"kind": "disagreement"` and
/// their 1-based `index`. Embedding rows map each graph edge id to the ids
/// of its host path; the poorer network's rows omit disagreement edges.
pub fn agreement_witness_json(a: &AgreementDistance) -> Value {
    let g = &a.graph;
    let taxa = g.graph.taxa();
    let (ncomp, comp) = g.graph.components();
    let mut comps: Vec<Map<String, Value>> = Vec::new();
    let mut slot = vec![usize::MAX; ncomp];
    for v in g.graph.vertices() {
        let c = comp[v.index()];
        if slot[c] == usize::MAX {
            slot[c] = comps.len();
            let mut m = Map::new();
            m.insert("kind".into(), json!("agreement"));
            m.insert("vertices".into(), json!([]));
            m.insert("edges".into(), json!([]));
            comps.push(m);
        }
        let m = &mut comps[slot[c]];
        m["vertices"]
            .as_array_mut()
            .unwrap()
            .push(json!({"id": v.0, "label": label_json(taxa, g.graph.label(v))}));
    }
    for e in g.graph.edges() {
        let (a, b) = g.graph.endpoints(e);
        let m = &mut comps[slot[comp[a.index()]]];
        m["edges"]
            .as_array_mut()
            .unwrap()
            .push(json!({"id": e.0, "tail": a.0, "head": b.0}));
        if let Some(j) = g.disagreement.iter().position(|&d| d == e) {
            m.insert("kind".into(), json!("disagreement"));
            m.insert("index".into(), json!(j + 1));
        }
    }
    let (_, _, ce) = g.without_disagreement();
    let mut core_to_graph = vec![0u32; ce.iter().flatten().count()];
    for (e, c) in ce.iter().enumerate() {
        if let Some(c) = c {
            core_to_graph[*c as usize] = e as u32;
        }
    }
    let full: Vec<u32> = (0..g.graph.edge_count() as u32).collect();
    let poorer_is_n = a.embedding_n.guest.edge_count() < g.graph.edge_count()
        || a.embedding_n.host.reticulation_count() <= a.embedding_nprime.host.reticulation_count();
    let (map_n, map_np) = if poorer_is_n {
        (&core_to_graph, &full)
    } else {
        (&full, &core_to_graph)
    };
    json!({
        "d": a.d,
        "s": a.s,
        "l": a.l,
        "components": comps,
        "embedding_N": embedding_json(&a.embedding_n, map_n),
        "embedding_Nprime": embedding_json(&a.embedding_nprime, map_np),
    })
}

fn embedding_from(
    rows: &[Value],
    host: &PhyloNetwork,
    guest: &PrunedGraph,
    graph_to_guest: &[Option<u32>],
) -> Result<AgreementEmbedding, String> {
    let mut edge_map = vec![Vec::new(); guest.edge_count()];
    let mut seen = vec![false; guest.edge_count()];
    for r in rows {
        let id = uint(r, "guest_edge")? as usize;
        let f = graph_to_guest
            .get(id)
            .copied()
            .flatten()
            .ok_or_else(|| format!("guest edge {id} is not in this embedding's guest"))?
            as usize;
        if std::mem::replace(&mut seen[f], true) {
            return Err(format!("guest edge {id} listed twice"));
        }
        edge_map[f] = array(r, "host_edges")?
            .iter()
            .map(|x| {
                x.as_u64()
                    .map(|x| EdgeId(x as u32))
                    .ok_or("bad host edge id".to_string())
            })
            .collect::<Result<Vec<_>, _>>()?;
        if let Some(bad) = edge_map[f].iter().find(|e| e.index() >= host.edge_count()) {
            return Err(format!("host edge {bad} does not exist"));
        }
    }
    if seen.iter().any(|&s| !s) {
        return Err("embedding does not list every guest edge".into());
    }
    let mut vertex_map = vec![VertexId(u32::MAX); guest.vertex_count()];
    for f in guest.edges() {
        let (a, b) = guest.endpoints(f);
        let path = &edge_map[f.index()];
        if let (Some(first), Some(last)) = (path.first(), path.last()) {
            vertex_map[a.index()] = host.endpoints(*first).0;
            vertex_map[b.index()] = host.endpoints(*last).1;
        }
    }
    for v in guest.vertices() {
        if vertex_map[v.index()].0 == u32::MAX {
            let l = guest
                .label(v)
                .ok_or_else(|| format!("guest vertex {v} has no image"))?;
            vertex_map[v.index()] = host
                .vertices()
                .find(|&h| host.label(h) == Some(l))
                .ok_or_else(|| format!("label of guest vertex {v} is missing in the host"))?;
        }
    }
    Ok(AgreementEmbedding {
        host: host.clone(),
        guest: guest.clone(),
        vertex_map,
        edge_map,
    })
}

/// Rebuilds the agreement graph and both embeddings of a witness document
/// for `n` and `np` as parsed.
pub fn agreement_witness_from_json(
    v: &Value,
    n: &PhyloNetwork,
    np: &PhyloNetwork,
) -> Result<(AgreementGraph, AgreementCertificate), String> {
    let taxa = n.taxa();
    let mut labels: Vec<Option<Option<Label>>> = Vec::new();
    let mut edges: Vec<Option<(u32, u32)>> = Vec::new();
    let mut dis: Vec<(u32, EdgeId)> = Vec::new();
    for c in array(v, "components")? {
        for x in array(c, "vertices")? {
            let id = uint(x, "id")? as usize;
            if labels.len() <= id {
                labels.resize(id + 1, None);
            }
            labels[id] = Some(label_from(taxa, field(x, "label")?)?);
        }
        let is_dis = field(c, "kind")?.as_str() == Some("disagreement");
        for x in array(c, "edges")? {
            let id = uint(x, "id")? as usize;
            if edges.len() <= id {
                edges.resize(id + 1, None);
            }
            edges[id] = Some((uint(x, "tail")?, uint(x, "head")?));
            if is_dis {
                dis.push((uint(c, "index")?, EdgeId(id as u32)));
            }
        }
    }
    let labels = labels
        .into_iter()
        .collect::<Option<Vec<_>>>()
        .ok_or("vertex ids are not contiguous")?;
    let edges = edges
        .into_iter()
        .collect::<Option<Vec<_>>>()
        .ok_or("edge ids are not contiguous")?;
    dis.sort();
    let graph = PrunedGraph::from_raw(taxa.clone(), labels, edges).map_err(|e| e.to_string())?;
    let g = AgreementGraph::new(graph, dis.into_iter().map(|d| d.1).collect())
        .map_err(|e| e.to_string())?;
    let (core, _, ce) = g.without_disagreement();
    let full: Vec<Option<u32>> = (0..g.graph.edge_count() as u32).map(Some).collect();
    let n_poorer = n.reticulation_count() <= np.reticulation_count();
    let (guest_n, map_n, guest_np, map_np) = if n_poorer {
        (&core, &ce, &g.graph, &full)
    } else {
        (&g.graph, &full, &core, &ce)
    };
    let e_n = embedding_from(array(v, "embedding_N")?, n, guest_n, map_n)?;
    let e_np = embedding_from(array(v, "embedding_Nprime")?, np, guest_np, map_np)?;
    Ok((
        g,
        AgreementCertificate {
            embedding_n: e_n,
            embedding_nprime: e_np,
        },
    ))
}

/// `{"metric", "value", "exhausted", "witness"}`; the witness is `null`
/// unless requested.
pub fn distance_json(r: &DistanceResult, witness: bool) -> Value {
    let w = if !witness {
        Value::Null
    } else {
        match &r.witness {
            Witness::Sequence(s) => sequence_json(s),
            Witness::Agreement(a) => agreement_witness_json(a),
        }
    };
    json!({
        "metric": r.metric.name(),
        "value": r.value,
        "exhausted": r.exhausted,
        "witness": w,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agreement::{agreement_distance, verify_agreement_witness};
    use crate::distances::{pr_distance, verify_sequence, SearchOptions};
    use crate::newick::parse_enewick_with_taxa;

    #[test]
    fn witness_roundtrip_verifies() {
        let taxa = Arc::new(TaxaSet::numbered(4));
        let a = parse_enewick_with_taxa("(((1,2),3),4);", &taxa).unwrap();
        let b = parse_enewick_with_taxa("((((1)#H1,2),(#H1,3)),4);", &taxa).unwrap();
        for (x, y) in [(&a, &b), (&b, &a)] {
            let m = agreement_distance(x, y).unwrap();
            let doc = agreement_witness_json(&m);
            assert_eq!(doc["d"], m.d);
            let (g, cert) = agreement_witness_from_json(&doc, x, y).unwrap();
            assert!(verify_agreement_witness(&g, x, y, &cert).ok);
        }
    }

    #[test]
    fn sequence_roundtrip_replays() {
        let taxa = Arc::new(TaxaSet::numbered(4));
        let a = parse_enewick_with_taxa("(((1,2),3),4);", &taxa).unwrap();
        let b = parse_enewick_with_taxa("((1,2),(3,4));", &taxa).unwrap();
        let r = pr_distance(&a, &b, SearchOptions::default()).unwrap();
        let doc = distance_json(&r, true);
        assert_eq!(doc["metric"], "pr");
        let seq = sequence_from_json(&doc["witness"], &taxa).unwrap();
        assert!(verify_sequence(&seq).ok);
        assert_eq!(seq.len(), r.value);
        assert!(distance_json(&r, false)["witness"].is_null());
    }
}
