#pragma once

#include <string>
#include <string_view>

#include "lhrm/common.hpp"

namespace lhrm {

// Base-32 geohash alphabet; note the missing 'a', 'i', 'l', 'o'.
inline constexpr std::string_view kGeohashAlphabet = "0123456789bcdefghjkmnpqrstuvwxyz";
inline constexpr int kMaxGeohashPrecision = 12;

struct GeoPoint {
    double lat;
    double lon;

    GeoPoint(double lat_deg, double lon_deg) : lat(lat_deg), lon(lon_deg) {
        if (!(lat >= -90.0 && lat <= 90.0))
            throw ValidationError("latitude out of range [-90, 90]: " + format_double(lat));
        if (!(lon >= -180.0 && lon <= 180.0))
            throw ValidationError("longitude out of range [-180, 180]: " + format_double(lon));
    }
};

struct GeohashToken {
    std::string code;  // length == precision, alphabet characters only
    int precision = 0;
};

struct GeoBox {
    double lat_min, lat_max;
    double lon_min, lon_max;

    bool contains(const GeoPoint& p) const {
        return p.lat >= lat_min && p.lat <= lat_max && p.lon >= lon_min && p.lon <= lon_max;
    }
};

// Standard geohash encoding: alternate longitude/latitude interval bisection,
// longitude bit first, 5 bits per output character. A coordinate exactly on a
// bisection line goes to the upper interval.
inline GeohashToken encode_geohash(const GeoPoint& point, int precision) {
    if (precision < 1 || precision > kMaxGeohashPrecision)
        throw ValidationError("geohash precision must be in [1, 12], got " +
                              std::to_string(precision));

    double lat_lo = -90.0, lat_hi = 90.0;
    double lon_lo = -180.0, lon_hi = 180.0;
    std::string code;
    code.reserve(static_cast<std::size_t>(precision));

    bool lon_turn = true;
    int idx = 0;
    int bits = 0;
    while (static_cast<int>(code.size()) < precision) {
        if (lon_turn) {
            const double mid = (lon_lo + lon_hi) / 2.0;
            if (point.lon >= mid) {
                idx = (idx << 1) | 1;
                lon_lo = mid;
            } else {
                idx <<= 1;
                lon_hi = mid;
            }
        } else {
            const double mid = (lat_lo + lat_hi) / 2.0;
            if (point.lat >= mid) {
                idx = (idx << 1) | 1;
                lat_lo = mid;
            } else {
                idx <<= 1;
                lat_hi = mid;
            }
        }
        lon_turn = !lon_turn;
        if (++bits == 5) {
            code.push_back(kGeohashAlphabet[static_cast<std::size_t>(idx)]);
            idx = 0;
            bits = 0;
        }
    }
    return GeohashToken{std::move(code), precision};
}

// Inverse mapping to the cell bounding box. Used by tests; encoding is the
// production path.
inline GeoBox decode_geohash(std::string_view code) {
    if (code.empty() || code.size() > static_cast<std::size_t>(kMaxGeohashPrecision))
        throw ValidationError("geohash code length must be in [1, 12]");

    GeoBox box{-90.0, 90.0, -180.0, 180.0};
    bool lon_turn = true;
    for (char c : code) {
        const std::size_t idx = kGeohashAlphabet.find(c);
        if (idx == std::string_view::npos)
            throw ValidationError(std::string("invalid geohash character '") + c + "'");
        for (int bit = 4; bit >= 0; --bit) {
            const bool upper = ((idx >> bit) & 1u) != 0;
            if (lon_turn) {
                const double mid = (box.lon_min + box.lon_max) / 2.0;
                (upper ? box.lon_min : box.lon_max) = mid;
            } else {
                const double mid = (box.lat_min + box.lat_max) / 2.0;
                (upper ? box.lat_min : box.lat_max) = mid;
            }
            lon_turn = !lon_turn;
        }
    }
    return box;
}

// Canonical LBS token used in behaviour sequences: the precision-5 geohash
// (roughly a 5 km cell).
inline GeohashToken token_for_event(const GeoPoint& point) { return encode_geohash(point, 5); }

}  // namespace lhrm
