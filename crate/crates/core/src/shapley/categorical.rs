use super::{brute_force_sv, SVReport};
use crate::data::{Dataset, EncodingScheme, EncodingSpec, PlayerPartition};
use crate::error::{Error, Result};
use crate::estimators::{Estimator, Explainer};
use crate::tree::{LeafRegion, TreeEnsemble};

/// Checks that every encoding's derived columns form exactly one player.
pub fn check_encoding_groups(partition: &PlayerPartition, encodings: &[EncodingSpec]) -> Result<()> {
    let owner = partition.player_of_column(partition.max_column().map_or(0, |m| m + 1));
    for spec in encodings {
        let cols = spec.derived_columns();
        let players: Vec<Option<usize>> = cols.iter().map(|&c| owner.get(c).copied().flatten()).collect();
        if players.iter().any(Option::is_none) {
            return Err(Error::Config(format!(
                "indicator columns {cols:?} of source column {} are not all assigned to a player",
                spec.source
            )));
        }
        if players.windows(2).any(|w| w[0] != w[1]) {
            return Err(Error::Config(format!(
                "indicator columns {cols:?} of source column {} are split across players",
                spec.source
            )));
        }
        let group = partition.group(players[0].unwrap());
        if group.len() != cols.len() {
            return Err(Error::Config(format!(
                "player '{}' mixes indicator columns of source column {} with other columns",
                partition.labels()[players[0].unwrap()],
                spec.source
            )));
        }
    }
    Ok(())
}

/// True when no valid encoding pattern lies in the leaf region.
fn infeasible(region: &LeafRegion, spec: &EncodingSpec) -> bool {
    let mut forced_one = 0;
    let mut forced_zero = 0;
    let cols = spec.derived_columns();
    for &c in &cols {
        let (lo, hi) = region.interval(c);
        let zero = lo < 0.0 && 0.0 <= hi;
        let one = lo < 1.0 && 1.0 <= hi;
        match (zero, one) {
            (false, false) => return true,
            (false, true) => forced_one += 1,
            (true, false) => forced_zero += 1,
            (true, true) => {}
        }
    }
    forced_one >= 2 || (spec.scheme == EncodingScheme::OneHot && forced_zero == cols.len())
}

/// The model extended by zero on leaves that only cover impossible
/// indicator patterns.
pub fn extend_by_zero(ensemble: &TreeEnsemble, encodings: &[EncodingSpec]) -> TreeEnsemble {
    ensemble.map_leaf_values(|_, region| {
        if encodings.iter().any(|spec| infeasible(region, spec)) {
            0.0
        } else {
            region.value
        }
    })
}

/// Shapley values where each encoded categorical variable is one player made
/// of its indicator columns.
#[allow(clippy::too_many_arguments)]
pub fn coalition_sv_categorical(
    ensemble: &TreeEnsemble,
    data: &Dataset,
    partition: &PlayerPartition,
    encodings: &[EncodingSpec],
    x: &[f64],
    estimator: Estimator,
    instance: usize,
    max_players: usize,
) -> Result<SVReport> {
    check_encoding_groups(partition, encodings)?;
    let extended = extend_by_zero(ensemble, encodings);
    let explainer = Explainer::new(extended, Some(data.clone()), partition.clone())?;
    brute_force_sv(&explainer, x, estimator, instance, max_players)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::Bound;

    fn region(bounds: Vec<Bound>) -> LeafRegion {
        LeafRegion {
            leaf_id: 0,
            node: 0,
            bounds,
            depth: 0,
            value: 1.0,
            count: 1,
        }
    }

    fn ones(c: usize) -> Bound {
        Bound {
            feature: c,
            lower: 0.5,
            upper: f64::INFINITY,
        }
    }

    fn zeros(c: usize) -> Bound {
        Bound {
            feature: c,
            lower: f64::NEG_INFINITY,
            upper: 0.5,
        }
    }

    #[test]
    fn infeasible_patterns() {
        let dummy = EncodingSpec {
            scheme: EncodingScheme::Dummy,
            source: 0,
            dropped_category: Some("c".into()),
            column_map: vec![("a".into(), 1), ("b".into(), 2)],
        };
        assert!(infeasible(&region(vec![ones(1), ones(2)]), &dummy));
        assert!(!infeasible(&region(vec![zeros(1), zeros(2)]), &dummy));
        assert!(!infeasible(&region(vec![ones(1)]), &dummy));
        let onehot = EncodingSpec {
            scheme: EncodingScheme::OneHot,
            dropped_category: None,
            ..dummy
        };
        assert!(infeasible(&region(vec![zeros(1), zeros(2)]), &onehot));
    }

    #[test]
    fn ungrouped_indicator_is_config_error() {
        let spec = EncodingSpec {
            scheme: EncodingScheme::Dummy,
            source: 0,
            dropped_category: Some("c".into()),
            column_map: vec![("a".into(), 1), ("b".into(), 2)],
        };
        let split = PlayerPartition::new(vec![vec![1], vec![2]], vec!["a".into(), "b".into()]).unwrap();
        assert!(matches!(
            check_encoding_groups(&split, std::slice::from_ref(&spec)),
            Err(Error::Config(_))
        ));
        let partial = PlayerPartition::new(vec![vec![1]], vec!["a".into()]).unwrap();
        assert!(check_encoding_groups(&partial, std::slice::from_ref(&spec)).is_err());
        let ok = PlayerPartition::new(vec![vec![1, 2]], vec!["z".into()]).unwrap();
        assert!(check_encoding_groups(&ok, &[spec]).is_ok());
    }
}
