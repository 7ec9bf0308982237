#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "metactl/error.hpp"
#include "metactl/nav_sim.hpp"
#include "metactl/numeric_format.hpp"

namespace metactl::nav {

double wrap_angle(double a) {
    a = std::remainder(a, 2.0 * M_PI);
    return a <= -M_PI ? a + 2.0 * M_PI : a;
}

OccupancyGrid::OccupancyGrid(int width, int height, double resolution, Vec2 origin)
    : width_(width), height_(height), resolution_(resolution), origin_(origin) {
    if (width <= 0 || height <= 0 || !(resolution > 0.0)) {
        throw Error(ErrorCode::invalid_argument, "grid dimensions and resolution must be positive");
    }
    cells_.assign(static_cast<std::size_t>(width) * height, 0);
}

void OccupancyGrid::set_occupied(Cell c, bool occupied) {
    if (in_bounds(c)) cells_[index(c)] = occupied ? 1 : 0;
}

void OccupancyGrid::fill_box(Vec2 lo, Vec2 hi) {
    for (int y = 0; y < height_; ++y) {
        for (int x = 0; x < width_; ++x) {
            const Vec2 p = center_of({x, y});
            if (p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y) set_occupied({x, y}, true);
        }
    }
}

std::vector<Cell> OccupancyGrid::disc_cells(Vec2 center, double radius) const {
    std::vector<Cell> out;
    const Cell c = cell_of(center);
    const int reach = static_cast<int>(std::ceil(radius / resolution_)) + 1;
    for (int dy = -reach; dy <= reach; ++dy) {
        for (int dx = -reach; dx <= reach; ++dx) {
            const Cell n{c.x + dx, c.y + dy};
            if (in_bounds(n) && distance(center_of(n), center) <= radius) out.push_back(n);
        }
    }
    return out;
}

Cell OccupancyGrid::cell_of(Vec2 p) const {
    return {static_cast<int>(std::floor((p.x - origin_.x) / resolution_)),
            static_cast<int>(std::floor((p.y - origin_.y) / resolution_))};
}

Vec2 OccupancyGrid::center_of(Cell c) const {
    return {origin_.x + (c.x + 0.5) * resolution_, origin_.y + (c.y + 0.5) * resolution_};
}

std::size_t OccupancyGrid::occupied_count() const {
    return static_cast<std::size_t>(std::count(cells_.begin(), cells_.end(), std::uint8_t{1}));
}

OccupancyGrid OccupancyGrid::parse(std::istream& in) {
    std::string line;
    auto next_line = [&]() -> bool {
        while (std::getline(in, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (!line.empty()) return true;
        }
        return false;
    };
    if (!next_line()) throw Error(ErrorCode::invalid_argument, "grid file: missing header");

    std::istringstream header(line);
    std::string fields[5];
    for (auto& f : fields) header >> f;
    const auto w = parse_number(fields[0]);
    const auto h = parse_number(fields[1]);
    const auto res = parse_number(fields[2]);
    const auto ox = parse_number(fields[3]);
    const auto oy = parse_number(fields[4]);
    if (!w || !h || !res || !ox || !oy || *w != std::floor(*w) || *h != std::floor(*h)) {
        throw Error(ErrorCode::invalid_argument, "grid file: bad header '" + line + "'");
    }
    OccupancyGrid grid(static_cast<int>(*w), static_cast<int>(*h), *res, {*ox, *oy});
    for (int row = 0; row < grid.height_; ++row) {
        if (!next_line()) throw Error(ErrorCode::invalid_argument, "grid file: too few rows");
        if (static_cast<int>(line.size()) != grid.width_) {
            throw Error(ErrorCode::invalid_argument,
                        "grid file: row " + std::to_string(row + 1) + " has " + std::to_string(line.size()) +
                            " cells, expected " + std::to_string(grid.width_));
        }
        const int y = grid.height_ - 1 - row;
        for (int x = 0; x < grid.width_; ++x) {
            const char ch = line[x];
            if (ch != '#' && ch != '.') {
                throw Error(ErrorCode::invalid_argument, std::string("grid file: unexpected character '") + ch + "'");
            }
            grid.set_occupied({x, y}, ch == '#');
        }
    }
    if (next_line()) throw Error(ErrorCode::invalid_argument, "grid file: too many rows");
    return grid;
}

OccupancyGrid OccupancyGrid::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::invalid_argument, "cannot open grid file " + path);
    return parse(in);
}

std::string OccupancyGrid::to_text() const {
    std::string out = std::to_string(width_) + " " + std::to_string(height_) + " " +
                      format_number(resolution_) + " " + format_number(origin_.x) + " " +
                      format_number(origin_.y) + "\n";
    for (int y = height_ - 1; y >= 0; --y) {
        for (int x = 0; x < width_; ++x) out += occupied({x, y}) ? '#' : '.';
        out += '\n';
    }
    return out;
}

// ---------------------------------------------------------------------------

ClearanceMap::ClearanceMap(const OccupancyGrid& grid, double max_range)
    : width_(grid.width()),
      height_(grid.height()),
      resolution_(grid.resolution()),
      max_range_(max_range),
      window_(static_cast<int>(std::ceil(max_range / grid.resolution()))),
      dist_(static_cast<std::size_t>(grid.width()) * grid.height(), static_cast<float>(max_range)) {
    // Only boundary cells matter: any free cell is at least as close to a
    // boundary cell of a blob as to its interior.
    std::vector<Cell> boundary;
    for (int y = 0; y < height_; ++y) {
        for (int x = 0; x < width_; ++x) {
            if (!grid.occupied({x, y})) continue;
            const bool interior = grid.occupied({x - 1, y}) && grid.occupied({x + 1, y}) &&
                                  grid.occupied({x, y - 1}) && grid.occupied({x, y + 1});
            if (interior) {
                dist_[static_cast<std::size_t>(y) * width_ + x] = 0.0F;
            } else {
                boundary.push_back({x, y});
            }
        }
    }
    add_occupied(boundary);
}

void ClearanceMap::add_occupied(std::span<const Cell> cells) {
    for (const Cell c : cells) {
        for (int dy = -window_; dy <= window_; ++dy) {
            const int y = c.y + dy;
            if (y < 0 || y >= height_) continue;
            for (int dx = -window_; dx <= window_; ++dx) {
                const int x = c.x + dx;
                if (x < 0 || x >= width_) continue;
                const float d = static_cast<float>(std::sqrt(double(dx * dx + dy * dy)) * resolution_);
                float& slot = dist_[static_cast<std::size_t>(y) * width_ + x];
                if (d < slot) slot = d;
            }
        }
    }
}

double ClearanceMap::at(Cell c) const {
    if (c.x < 0 || c.y < 0 || c.x >= width_ || c.y >= height_) return 0.0;
    return dist_[static_cast<std::size_t>(c.y) * width_ + c.x];
}

}  // namespace metactl::nav
