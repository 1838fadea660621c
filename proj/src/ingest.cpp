#include "topospat/ingest.hpp"

#include "topospat/error.hpp"
#include "topospat/text_io.hpp"

#include <cmath>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace topospat {

namespace {

std::string join(const std::vector<std::string>& names) {
    std::string out;
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (i) {
            out += ',';
        }
        out += names[i];
    }
    return out;
}

} // namespace

bool Dataset::transformed() const {
    for (const auto& f : features) {
        if (f.transformed) {
            return true;
        }
    }
    return false;
}

void Dataset::validate() const {
    if (location_ids.size() != locations.size()) {
        throw ValidationError("location id count does not match coordinate count");
    }
    for (std::size_t i = 0; i < locations.size(); ++i) {
        if (!std::isfinite(locations[i].x) || !std::isfinite(locations[i].y)) {
            throw ValidationError("non-finite coordinate for location '" + location_ids[i] + "'");
        }
    }
    std::unordered_set<std::string> names;
    for (const auto& f : features) {
        if (!names.insert(f.name).second) {
            throw ValidationError("duplicate feature name '" + f.name + "'");
        }
        if (f.values.size() != locations.size()) {
            throw ValidationError("feature '" + f.name + "' has " + std::to_string(f.values.size()) +
                                  " values, expected " + std::to_string(locations.size()));
        }
        for (double v : f.values) {
            if (!std::isfinite(v)) {
                throw ValidationError("non-finite value in feature '" + f.name + "'");
            }
            if (!f.transformed && v < 0) {
                throw ValidationError("negative raw count in feature '" + f.name + "'");
            }
        }
    }
}

Dataset load_dataset(const std::string& counts_path, const std::string& coords_path) {
    // Coordinates first: they define the location order.
    const std::string coords_text = text::read_file(coords_path);
    const auto coord_lines = text::lines(coords_text);
    if (coord_lines.empty()) {
        throw ParseError("empty coordinates file '" + coords_path + "'", 1, 1);
    }
    const char coord_delim = text::detect_delimiter(coord_lines[0]);
    const auto coord_header = text::split(coord_lines[0], coord_delim);
    std::size_t id_col = 0, x_col = 1, y_col = 2;
    for (std::size_t c = 0; c < coord_header.size(); ++c) {
        if (coord_header[c] == "id") id_col = c;
        else if (coord_header[c] == "x") x_col = c;
        else if (coord_header[c] == "y") y_col = c;
    }
    if (coord_header.size() < 3) {
        throw ParseError("coordinates header must have columns id, x, y", 1, coord_header.size());
    }

    Dataset ds;
    std::unordered_map<std::string, std::size_t> location_index;
    for (std::size_t r = 1; r < coord_lines.size(); ++r) {
        const auto cells = text::split(coord_lines[r], coord_delim);
        if (cells.size() != coord_header.size()) {
            throw ParseError("expected " + std::to_string(coord_header.size()) + " fields in '" + coords_path + "'",
                             r + 1, cells.size());
        }
        Point p;
        if (!text::parse_double(cells[x_col], p.x)) {
            throw ParseError("non-numeric coordinate '" + std::string(cells[x_col]) + "'", r + 1, x_col + 1);
        }
        if (!text::parse_double(cells[y_col], p.y)) {
            throw ParseError("non-numeric coordinate '" + std::string(cells[y_col]) + "'", r + 1, y_col + 1);
        }
        std::string id(cells[id_col]);
        if (!location_index.emplace(id, ds.locations.size()).second) {
            throw ValidationError("duplicate location id '" + id + "'");
        }
        ds.location_ids.push_back(std::move(id));
        ds.locations.push_back(p);
    }

    const std::string counts_text = text::read_file(counts_path);
    const auto count_lines = text::lines(counts_text);
    if (count_lines.empty()) {
        throw ParseError("empty counts file '" + counts_path + "'", 1, 1);
    }
    const char delim = text::detect_delimiter(count_lines[0]);
    const auto header = text::split(count_lines[0], delim);

    // column -> position in the coordinate order
    std::vector<std::size_t> target(header.size(), 0);
    std::unordered_set<std::string> seen;
    for (std::size_t c = 1; c < header.size(); ++c) {
        std::string id(header[c]);
        auto it = location_index.find(id);
        if (it == location_index.end()) {
            throw LoadError("location '" + id + "' is in the counts file but missing from the coordinates file");
        }
        if (!seen.insert(id).second) {
            throw ValidationError("duplicate location id '" + id + "' in counts header");
        }
        target[c] = it->second;
    }
    for (const auto& id : ds.location_ids) {
        if (!seen.count(id)) {
            throw LoadError("location '" + id + "' is in the coordinates file but missing from the counts file");
        }
    }

    for (std::size_t r = 1; r < count_lines.size(); ++r) {
        const auto cells = text::split(count_lines[r], delim);
        if (cells.size() != header.size()) {
            throw ParseError("expected " + std::to_string(header.size()) + " fields in '" + counts_path + "'", r + 1,
                             cells.size());
        }
        FeatureRecord f;
        f.name = std::string(cells[0]);
        f.values.assign(ds.locations.size(), 0.0);
        for (std::size_t c = 1; c < cells.size(); ++c) {
            double v;
            if (!text::parse_double(cells[c], v)) {
                throw ParseError("non-numeric value '" + std::string(cells[c]) + "'", r + 1, c + 1);
            }
            f.values[target[c]] = v;
        }
        ds.features.push_back(std::move(f));
    }

    ds.metadata["source.counts"] = counts_path;
    ds.metadata["source.coords"] = coords_path;
    ds.validate();
    return ds;
}

void save_dataset(const Dataset& ds, const std::string& counts_path, const std::string& coords_path) {
    std::string counts = "feature";
    for (const auto& id : ds.location_ids) {
        counts += '\t';
        counts += id;
    }
    counts += '\n';
    for (const auto& f : ds.features) {
        counts += f.name;
        for (double v : f.values) {
            counts += '\t';
            counts += text::format_double(v);
        }
        counts += '\n';
    }

    std::string coords = "id\tx\ty\n";
    for (std::size_t i = 0; i < ds.locations.size(); ++i) {
        coords += ds.location_ids[i] + '\t' + text::format_double(ds.locations[i].x) + '\t' +
                  text::format_double(ds.locations[i].y) + '\n';
    }

    text::write_file_atomic(counts_path, counts);
    text::write_file_atomic(coords_path, coords);
}

void save_labels(const Dataset& ds, const std::string& path) {
    std::string out = "feature\tlabel\n";
    for (const auto& f : ds.features) {
        if (f.label) {
            out += f.name + '\t' + (*f.label ? "1" : "0") + '\n';
        }
    }
    text::write_file_atomic(path, out);
}

std::map<std::string, bool> load_labels(const std::string& path) {
    const std::string contents = text::read_file(path);
    const auto lines = text::lines(contents);
    std::map<std::string, bool> labels;
    for (std::size_t r = 1; r < lines.size(); ++r) {
        const auto cells = text::split(lines[r], text::detect_delimiter(lines[0]));
        if (cells.size() < 2) {
            throw ParseError("expected feature and label columns", r + 1, cells.size());
        }
        const auto v = cells[1];
        bool label;
        if (v == "1" || v == "true" || v == "TRUE" || v == "True") {
            label = true;
        } else if (v == "0" || v == "false" || v == "FALSE" || v == "False") {
            label = false;
        } else {
            throw ParseError("unrecognised label '" + std::string(v) + "'", r + 1, 2);
        }
        if (!labels.emplace(std::string(cells[0]), label).second) {
            throw ValidationError("duplicate feature '" + std::string(cells[0]) + "' in labels file");
        }
    }
    return labels;
}

Dataset qc_filter(const Dataset& ds, const QcOptions& options) {
    if (ds.transformed()) {
        throw StateError("qc_filter expects raw counts");
    }
    const std::size_t n = ds.n_locations();
    const auto min_presence = static_cast<std::size_t>(std::ceil(options.min_presence_fraction * static_cast<double>(n)));

    Dataset out;
    out.metadata = ds.metadata;
    std::vector<std::string> dropped_features;
    std::vector<const FeatureRecord*> kept;
    for (const auto& f : ds.features) {
        double total = 0;
        std::size_t present = 0;
        for (double v : f.values) {
            total += v;
            present += (v > 0);
        }
        if (total < options.min_feature_total || present < min_presence || present == 0) {
            dropped_features.push_back(f.name);
        } else {
            kept.push_back(&f);
        }
    }
    if (kept.empty()) {
        throw ValidationError("quality control removed every feature");
    }

    std::vector<std::size_t> kept_locations;
    std::vector<std::string> dropped_locations;
    for (std::size_t l = 0; l < n; ++l) {
        double total = 0;
        for (const auto* f : kept) {
            total += f->values[l];
        }
        if (total < options.min_location_total) {
            dropped_locations.push_back(ds.location_ids[l]);
        } else {
            kept_locations.push_back(l);
        }
    }
    if (kept_locations.empty()) {
        throw ValidationError("quality control removed every location");
    }

    for (auto l : kept_locations) {
        out.location_ids.push_back(ds.location_ids[l]);
        out.locations.push_back(ds.locations[l]);
    }
    for (const auto* f : kept) {
        FeatureRecord g;
        g.name = f->name;
        g.label = f->label;
        g.transformed = f->transformed;
        g.values.reserve(kept_locations.size());
        for (auto l : kept_locations) {
            g.values.push_back(f->values[l]);
        }
        out.features.push_back(std::move(g));
    }
    out.metadata["qc.dropped_features"] = join(dropped_features);
    out.metadata["qc.dropped_locations"] = join(dropped_locations);
    return out;
}

Dataset exclude_prefixes(const Dataset& ds, const std::vector<std::string>& prefixes) {
    Dataset out = ds;
    out.features.clear();
    std::vector<std::string> excluded;
    for (const auto& f : ds.features) {
        bool drop = false;
        for (const auto& prefix : prefixes) {
            if (!prefix.empty() && f.name.rfind(prefix, 0) == 0) {
                drop = true;
                break;
            }
        }
        if (drop) {
            excluded.push_back(f.name);
        } else {
            out.features.push_back(f);
        }
    }
    if (out.features.empty()) {
        throw ValidationError("prefix exclusion removed every feature");
    }
    out.metadata["excluded_features"] = join(excluded);
    return out;
}

Dataset shifted_log_transform(const Dataset& ds, double pseudo_count) {
    if (!(pseudo_count > 0)) {
        throw ParameterError("pseudo count must be positive");
    }
    if (ds.transformed()) {
        throw StateError("dataset is already log-transformed");
    }
    Dataset out = ds;
    for (auto& f : out.features) {
        for (double& v : f.values) {
            v = std::log(v + pseudo_count);
        }
        f.transformed = true;
    }
    std::ostringstream ss;
    ss << "log(x+" << pseudo_count << ")";
    out.metadata["transform"] = ss.str();
    return out;
}

} // namespace topospat
