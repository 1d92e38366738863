use std::cmp::Ordering;

use super::{RetrievalError, ScoredDoc, VectorIndex};

/// Exact scan: inner product against every document, best `k` first.
///
/// Ties are broken by ascending document id.
pub fn search_topk(
    index: &VectorIndex,
    query_vec: &[f64],
    k: usize,
) -> Result<Vec<ScoredDoc>, RetrievalError> {
    if index.is_empty() {
        return Err(RetrievalError::EmptyIndex);
    }
    if k == 0 {
        return Err(RetrievalError::InvalidK);
    }
    if query_vec.len() != index.dim {
        return Err(RetrievalError::DimensionMismatch {
            expected: index.dim,
            got: query_vec.len(),
        });
    }
    let mut scored: Vec<(f64, &str)> = index
        .docs
        .iter()
        .map(|d| {
            let dot = d
                .embedding
                .iter()
                .zip(query_vec)
                .map(|(a, b)| a * b)
                .sum::<f64>();
            (dot, d.id.as_str())
        })
        .collect();
    scored.sort_by(|a, b| match b.0.total_cmp(&a.0) {
        Ordering::Equal => a.1.cmp(b.1),
        other => other,
    });
    Ok(scored
        .into_iter()
        .take(k)
        .map(|(score, id)| ScoredDoc {
            doc_id: id.to_string(),
            score,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::retrieval::ExemplarDoc;
    use std::path::PathBuf;

    fn index(vectors: &[(&str, Vec<f64>)]) -> VectorIndex {
        let docs = vectors
            .iter()
            .map(|(id, v)| ExemplarDoc {
                id: id.to_string(),
                text: String::new(),
                token_count: 0,
                source_path: PathBuf::new(),
                embedding: v.clone(),
            })
            .collect();
        VectorIndex::new("test", docs).unwrap()
    }

    #[test]
    fn self_similarity_first() {
        let idx = index(&[("a", vec![0.6, 0.8]), ("b", vec![1.0, 0.0]), ("c", vec![0.0, 1.0])]);
        let hits = search_topk(&idx, &[0.6, 0.8], 3).unwrap();
        assert_eq!(hits[0].doc_id, "a");
        assert!((hits[0].score - 1.0).abs() < 1e-12);
    }

    #[test]
    fn orthogonal_query_orders_by_id() {
        let idx = index(&[("c", vec![1.0, 0.0, 0.0]), ("a", vec![0.0, 1.0, 0.0]), ("b", vec![1.0, 0.0, 0.0])]);
        let hits = search_topk(&idx, &[0.0, 0.0, 1.0], 3).unwrap();
        let ids: Vec<_> = hits.iter().map(|h| h.doc_id.as_str()).collect();
        assert_eq!(ids, ["a", "b", "c"]);
        assert!(hits.iter().all(|h| h.score == 0.0));
    }

    /// Five fixed unit vectors; the expected order and scores were produced by
    /// a separate brute-force cosine computation (raw dot / norms) and frozen.
    #[test]
    fn five_doc_corpus_matches_frozen_oracle() {
        let idx = index(&[
            ("d0", vec![1.0, 0.0, 0.0]),
            ("d1", vec![0.0, 1.0, 0.0]),
            ("d2", vec![0.0, 0.0, 1.0]),
            ("d3", vec![0.6, 0.8, 0.0]),
            ("d4", vec![0.0, 0.6, 0.8]),
        ]);
        // query (2, 1, 2)/3
        let q = [2.0 / 3.0, 1.0 / 3.0, 2.0 / 3.0];
        let hits = search_topk(&idx, &q, 3).unwrap();
        let expected = [("d4", 11.0 / 15.0), ("d0", 2.0 / 3.0), ("d2", 2.0 / 3.0)];
        assert_eq!(hits.len(), 3);
        for (h, (id, s)) in hits.iter().zip(expected) {
            assert_eq!(h.doc_id, id);
            assert!((h.score - s).abs() < 1e-12, "{} {}", h.score, s);
        }
    }

    #[test]
    fn contract_errors() {
        let idx = index(&[("a", vec![1.0, 0.0])]);
        assert!(matches!(search_topk(&idx, &[1.0, 0.0], 0), Err(RetrievalError::InvalidK)));
        assert!(matches!(
            search_topk(&idx, &[1.0], 1),
            Err(RetrievalError::DimensionMismatch { .. })
        ));
        let empty = VectorIndex::new("e", vec![]).unwrap();
        assert!(matches!(search_topk(&empty, &[], 1), Err(RetrievalError::EmptyIndex)));
        assert_eq!(search_topk(&idx, &[1.0, 0.0], 5).unwrap().len(), 1);
    }
}
