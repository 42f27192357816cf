#ifndef SLFV_SPATIAL_GRID_HPP
#define SLFV_SPATIAL_GRID_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include <slfv/geometry.hpp>

namespace slfv
{

struct CellKey {
    std::int64_t ix = 0;
    std::int64_t iy = 0;

    friend bool operator==(CellKey, CellKey) = default;
};

// Dense rectangular array of cells of side `cell_size` that grows on demand.
template <class Cell>
class DenseGrid
{
public:
    explicit DenseGrid(double cell_size) : m_cell(cell_size) {}

    [[nodiscard]] double cell_size() const noexcept
    {
        return m_cell;
    }

    [[nodiscard]] CellKey key(Point p) const noexcept
    {
        return {static_cast<std::int64_t>(std::floor(p.x / m_cell)), static_cast<std::int64_t>(std::floor(p.y / m_cell))};
    }

    [[nodiscard]] Window cell_window(CellKey k) const noexcept
    {
        return {static_cast<double>(k.ix) * m_cell, static_cast<double>(k.ix + 1) * m_cell,
                static_cast<double>(k.iy) * m_cell, static_cast<double>(k.iy + 1) * m_cell};
    }

    [[nodiscard]] const Cell *find(CellKey k) const noexcept
    {
        if (k.ix < m_x0 || k.iy < m_y0 || k.ix >= m_x0 + m_nx || k.iy >= m_y0 + m_ny) {
            return nullptr;
        }
        return &m_cells[index(k)];
    }

    [[nodiscard]] Cell *find(CellKey k) noexcept
    {
        return const_cast<Cell *>(std::as_const(*this).find(k));
    }

    Cell &at(CellKey k)
    {
        if (m_nx == 0 || k.ix < m_x0 || k.iy < m_y0 || k.ix >= m_x0 + m_nx || k.iy >= m_y0 + m_ny) {
            grow(k);
        }
        return m_cells[index(k)];
    }

    // Range of keys currently allocated (possibly empty).
    [[nodiscard]] std::int64_t x0() const noexcept
    {
        return m_x0;
    }
    [[nodiscard]] std::int64_t y0() const noexcept
    {
        return m_y0;
    }
    [[nodiscard]] std::int64_t nx() const noexcept
    {
        return m_nx;
    }
    [[nodiscard]] std::int64_t ny() const noexcept
    {
        return m_ny;
    }

    // Calls f(key, cell) for allocated cells overlapping the rectangle.
    template <class F>
    void for_each_in(const Window &w, F &&f) const
    {
        const CellKey lo = key({w.x_lo, w.y_lo});
        const CellKey hi = key({w.x_hi, w.y_hi});
        const std::int64_t ix0 = std::max(lo.ix, m_x0), ix1 = std::min(hi.ix, m_x0 + m_nx - 1);
        const std::int64_t iy0 = std::max(lo.iy, m_y0), iy1 = std::min(hi.iy, m_y0 + m_ny - 1);
        for (std::int64_t iy = iy0; iy <= iy1; ++iy) {
            for (std::int64_t ix = ix0; ix <= ix1; ++ix) {
                f(CellKey{ix, iy}, m_cells[index({ix, iy})]);
            }
        }
    }

private:
    [[nodiscard]] std::size_t index(CellKey k) const noexcept
    {
        return static_cast<std::size_t>((k.iy - m_y0) * m_nx + (k.ix - m_x0));
    }

    void grow(CellKey k)
    {
        if (m_nx == 0) {
            constexpr std::int64_t initial = 16;
            m_x0 = k.ix - initial / 2;
            m_y0 = k.iy - initial / 2;
            m_nx = m_ny = initial;
            m_cells.assign(static_cast<std::size_t>(m_nx * m_ny), Cell{});
            return;
        }
        std::int64_t x0 = m_x0, y0 = m_y0, x1 = m_x0 + m_nx, y1 = m_y0 + m_ny;
        // Double the extent on the side that overflowed.
        if (k.ix < x0) {
            x0 = std::min(k.ix, x0 - m_nx);
        } else if (k.ix >= x1) {
            x1 = std::max(k.ix + 1, x1 + m_nx);
        }
        if (k.iy < y0) {
            y0 = std::min(k.iy, y0 - m_ny);
        } else if (k.iy >= y1) {
            y1 = std::max(k.iy + 1, y1 + m_ny);
        }
        std::vector<Cell> cells(static_cast<std::size_t>((x1 - x0) * (y1 - y0)));
        for (std::int64_t iy = m_y0; iy < m_y0 + m_ny; ++iy) {
            for (std::int64_t ix = m_x0; ix < m_x0 + m_nx; ++ix) {
                cells[static_cast<std::size_t>((iy - y0) * (x1 - x0) + (ix - x0))] = std::move(m_cells[index({ix, iy})]);
            }
        }
        m_cells = std::move(cells);
        m_x0 = x0;
        m_y0 = y0;
        m_nx = x1 - x0;
        m_ny = y1 - y0;
    }

    double m_cell;
    std::int64_t m_x0 = 0;
    std::int64_t m_y0 = 0;
    std::int64_t m_nx = 0;
    std::int64_t m_ny = 0;
    std::vector<Cell> m_cells;
};

/// Balls bucketed by the cell of their centre. With cell size 2·R0 every ball that can
/// meet a query ball of radius <= R0 (or contain a query point) sits in the 3×3 block
/// around the query centre's cell.
class BallIndex
{
public:
    struct Slot {
        double x;
        double y;
        double r;
        std::uint32_t index;
    };

    explicit BallIndex(double max_radius) : m_grid(2.0 * max_radius) {}

    [[nodiscard]] double cell_size() const noexcept
    {
        return m_grid.cell_size();
    }

    void add(std::uint32_t index, const Ball &b)
    {
        m_grid.at(m_grid.key(b.center)).push_back(Slot{b.center.x, b.center.y, b.radius, index});
    }

    // Visits the slots in the 3×3 block around p's cell, the centre cell first, until
    // f returns true. Returns whether f stopped the scan.
    template <class F>
    bool scan_near(Point p, F &&f) const
    {
        const CellKey c = m_grid.key(p);
        if (scan_cell(c, f)) {
            return true;
        }
        for (std::int64_t dy = -1; dy <= 1; ++dy) {
            for (std::int64_t dx = -1; dx <= 1; ++dx) {
                if ((dx != 0 || dy != 0) && scan_cell({c.ix + dx, c.iy + dy}, f)) {
                    return true;
                }
            }
        }
        return false;
    }

    template <class F>
    void for_each_in(const Window &w, F &&f) const
    {
        m_grid.for_each_in(w.inflated(cell_size()), [&](CellKey, const std::vector<Slot> &slots) {
            for (const auto &s : slots) {
                f(s);
            }
        });
    }

    [[nodiscard]] const DenseGrid<std::vector<Slot>> &grid() const noexcept
    {
        return m_grid;
    }

private:
    template <class F>
    bool scan_cell(CellKey k, F &f) const
    {
        const auto *slots = m_grid.find(k);
        if (slots == nullptr) {
            return false;
        }
        for (const auto &s : *slots) {
            if (f(s)) {
                return true;
            }
        }
        return false;
    }

    DenseGrid<std::vector<Slot>> m_grid;
};

} // namespace slfv

#endif
