#pragma once

#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "lhrm/common.hpp"

namespace lhrm {

// Raw attributes before encoding: categorical and numeric fields by name.
struct RawAttributes {
    std::map<std::string, std::string> cat;
    std::map<std::string, double> num;
};

// Fixed-length encoding of raw attributes: one-hot categorical blocks (each
// with a trailing OOV slot) followed by min-max normalized numeric fields.
// Vocabularies and ranges are frozen from the rows the encoder was fit on.
class AttributeEncoder {
public:
    static AttributeEncoder fit(const std::vector<RawAttributes>& rows) {
        AttributeEncoder enc;
        std::map<std::string, std::set<std::string>> cat_values;
        std::map<std::string, std::pair<double, double>> num_range;
        for (const auto& row : rows) {
            for (const auto& [name, value] : row.cat) cat_values[name].insert(value);
            for (const auto& [name, value] : row.num) {
                auto it = num_range.find(name);
                if (it == num_range.end()) {
                    num_range[name] = {value, value};
                } else {
                    it->second.first = std::min(it->second.first, value);
                    it->second.second = std::max(it->second.second, value);
                }
            }
        }
        for (const auto& [name, values] : cat_values)
            enc.cat_fields_.push_back(
                CatField{name, std::vector<std::string>(values.begin(), values.end())});
        for (const auto& [name, range] : num_range)
            enc.num_fields_.push_back(NumField{name, range.first, range.second});
        return enc;
    }

    std::size_t dim() const {
        std::size_t d = num_fields_.size();
        for (const auto& f : cat_fields_) d += f.vocab.size() + 1;  // +1 for the OOV slot
        return d;
    }

    Vec encode(const RawAttributes& row) const {
        Vec v(dim(), 0.0);
        std::size_t offset = 0;
        for (const auto& f : cat_fields_) {
            std::size_t slot = f.vocab.size();  // OOV by default (also for missing fields)
            auto it = row.cat.find(f.name);
            if (it != row.cat.end()) {
                auto pos = std::lower_bound(f.vocab.begin(), f.vocab.end(), it->second);
                if (pos != f.vocab.end() && *pos == it->second)
                    slot = static_cast<std::size_t>(pos - f.vocab.begin());
            }
            v[offset + slot] = 1.0;
            offset += f.vocab.size() + 1;
        }
        for (const auto& f : num_fields_) {
            auto it = row.num.find(f.name);
            if (it != row.num.end() && f.max > f.min) {
                const double x = (it->second - f.min) / (f.max - f.min);
                v[offset] = std::clamp(x, 0.0, 1.0);
            }
            ++offset;
        }
        return v;
    }

    std::uint64_t schema_hash() const {
        std::uint64_t h = fnv1a("attr-schema-v1");
        for (const auto& f : cat_fields_) {
            h = fnv1a("cat:" + f.name, h);
            for (const auto& v : f.vocab) h = fnv1a(v, h);
        }
        for (const auto& f : num_fields_) {
            h = fnv1a("num:" + f.name, h);
            h = fnv1a(format_double(f.min), h);
            h = fnv1a(format_double(f.max), h);
        }
        return h;
    }

    // Line-block serialization embedded in checkpoint files.
    void serialize(std::ostream& out) const {
        out << "cat_fields=" << cat_fields_.size() << " num_fields=" << num_fields_.size() << '\n';
        for (const auto& f : cat_fields_) {
            out << "cat " << f.name << ' ' << f.vocab.size() << '\n';
            for (const auto& v : f.vocab) out << v << '\n';
        }
        for (const auto& f : num_fields_)
            out << "num " << f.name << ' ' << format_double(f.min) << ' ' << format_double(f.max)
                << '\n';
    }

    static AttributeEncoder deserialize(std::istream& in) {
        std::string line;
        if (!std::getline(in, line)) throw DataError("encoder block: missing header");
        std::size_t n_cat = 0, n_num = 0;
        if (std::sscanf(line.c_str(), "cat_fields=%zu num_fields=%zu", &n_cat, &n_num) != 2)
            throw DataError("encoder block: bad header: " + line);
        AttributeEncoder enc;
        for (std::size_t i = 0; i < n_cat; ++i) {
            if (!std::getline(in, line)) throw DataError("encoder block: truncated");
            const auto f = split(line, ' ');
            if (f.size() != 3 || f[0] != "cat") throw DataError("encoder block: bad cat field");
            CatField field{f[1], {}};
            const std::size_t count = static_cast<std::size_t>(parse_i64(f[2]));
            for (std::size_t j = 0; j < count; ++j) {
                if (!std::getline(in, line)) throw DataError("encoder block: truncated vocab");
                field.vocab.push_back(line);
            }
            enc.cat_fields_.push_back(std::move(field));
        }
        for (std::size_t i = 0; i < n_num; ++i) {
            if (!std::getline(in, line)) throw DataError("encoder block: truncated");
            const auto f = split(line, ' ');
            if (f.size() != 4 || f[0] != "num") throw DataError("encoder block: bad num field");
            enc.num_fields_.push_back(NumField{f[1], parse_double(f[2]), parse_double(f[3])});
        }
        return enc;
    }

private:
    struct CatField {
        std::string name;
        std::vector<std::string> vocab;  // sorted
    };
    struct NumField {
        std::string name;
        double min = 0.0, max = 0.0;
    };

    std::vector<CatField> cat_fields_;  // sorted by name (std::map fit order)
    std::vector<NumField> num_fields_;
};

}  // namespace lhrm
