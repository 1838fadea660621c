#ifndef TOPOSPAT_INGEST_HPP
#define TOPOSPAT_INGEST_HPP

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

/**
 * @file ingest.hpp
 *
 * @brief Loading, filtering and transforming spatial feature matrices.
 */

namespace topospat {

/// A 2-D location in arbitrary units.
struct Point {
    double x = 0;
    double y = 0;

    friend bool operator==(const Point&, const Point&) = default;
};

/**
 * @brief One feature (gene) measured at every location of a `Dataset`.
 *
 * Raw counts are non-negative; after `shifted_log_transform` the values are
 * arbitrary finite reals and `transformed` is set.
 * `label` is only present for simulated data, where it records whether the
 * feature was generated with a spatial signal.
 */
struct FeatureRecord {
    std::string name;
    std::vector<double> values;
    std::optional<bool> label;
    bool transformed = false;

    friend bool operator==(const FeatureRecord&, const FeatureRecord&) = default;
};

/**
 * @brief Features x locations matrix together with the location coordinates.
 *
 * Locations keep the order of the coordinates file, and every feature's values
 * are aligned to that order.
 */
struct Dataset {
    std::vector<std::string> location_ids;
    std::vector<Point> locations;
    std::vector<FeatureRecord> features;
    std::map<std::string, std::string> metadata;

    std::size_t n_locations() const { return locations.size(); }
    bool transformed() const;

    /// Throws `ValidationError` if any invariant is broken.
    void validate() const;

    friend bool operator==(const Dataset&, const Dataset&) = default;
};

/**
 * Read a counts matrix (features x locations; header row of location IDs,
 * first column feature names) and a coordinates table (`id x y`).
 * Tab is the default delimiter; comma-delimited files are detected from the
 * header line.
 */
Dataset load_dataset(const std::string& counts_path, const std::string& coords_path);

/// Write `ds` in the format read by `load_dataset`; values use the shortest
/// representation that round-trips exactly.
void save_dataset(const Dataset& ds, const std::string& counts_path, const std::string& coords_path);

/// Write `feature<TAB>label` for every labelled feature.
void save_labels(const Dataset& ds, const std::string& path);

/// Read a labels table into a name -> label map.
std::map<std::string, bool> load_labels(const std::string& path);

struct QcOptions {
    double min_feature_total = 10;
    double min_presence_fraction = 0.01;
    double min_location_total = 10;
};

/**
 * Drop features whose total count is below `min_feature_total` or that are
 * non-zero in fewer than ceil(min_presence_fraction * n_locations) locations,
 * then drop locations whose total over the retained features is below
 * `min_location_total`. Dropped names are listed in the metadata under
 * `qc.dropped_features` and `qc.dropped_locations`.
 */
Dataset qc_filter(const Dataset& ds, const QcOptions& options = {});

/// Remove every feature whose name starts with one of `prefixes`.
Dataset exclude_prefixes(const Dataset& ds, const std::vector<std::string>& prefixes);

/// Replace each value v by ln(v + pseudo_count). Rejects already transformed data.
Dataset shifted_log_transform(const Dataset& ds, double pseudo_count = 2);

} // namespace topospat

#endif
