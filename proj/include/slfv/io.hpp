#ifndef SLFV_IO_HPP
#define SLFV_IO_HPP

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include <slfv/chains.hpp>
#include <slfv/errors.hpp>

namespace slfv
{

// Shortest text that round-trips the value ("%.17g" is exact but noisy).
inline std::string format_double(double v)
{
    char buf[32];
    for (int prec = 15; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) {
            break;
        }
    }
    return buf;
}

/// Column-oriented CSV table of pre-formatted cells.
class Table
{
public:
    explicit Table(std::vector<std::string> header) : m_header(std::move(header)) {}

    class Row
    {
    public:
        explicit Row(std::vector<std::string> &cells) : m_cells(cells) {}
        Row &operator<<(double v)
        {
            m_cells.push_back(format_double(v));
            return *this;
        }
        Row &operator<<(std::uint64_t v)
        {
            m_cells.push_back(std::to_string(v));
            return *this;
        }
        Row &operator<<(int v)
        {
            m_cells.push_back(std::to_string(v));
            return *this;
        }
        Row &operator<<(bool v)
        {
            m_cells.emplace_back(v ? "1" : "0");
            return *this;
        }
        Row &operator<<(const std::string &v)
        {
            m_cells.push_back(v);
            return *this;
        }
        Row &operator<<(const char *v)
        {
            m_cells.emplace_back(v);
            return *this;
        }

    private:
        std::vector<std::string> &m_cells;
    };

    Row row()
    {
        m_rows.emplace_back();
        return Row(m_rows.back());
    }

    [[nodiscard]] const std::vector<std::string> &header() const noexcept
    {
        return m_header;
    }
    [[nodiscard]] std::size_t size() const noexcept
    {
        return m_rows.size();
    }

    void write(std::ostream &os) const
    {
        write_line(os, m_header);
        for (const auto &r : m_rows) {
            if (r.size() != m_header.size()) {
                throw contract_violation("CSV row width differs from the header");
            }
            write_line(os, r);
        }
    }

    void write(const std::string &path) const
    {
        std::ofstream os(path, std::ios::binary);
        if (!os) {
            throw config_error("cannot write " + path);
        }
        write(os);
    }

private:
    static void write_line(std::ostream &os, const std::vector<std::string> &cells)
    {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i != 0) {
                os << ',';
            }
            os << cells[i];
        }
        os << '\n';
    }

    std::vector<std::string> m_header;
    std::vector<std::vector<std::string>> m_rows;
};

// geodesic.csv: step,time,cx,cy,radius (step 0 is the seed link).
inline Table geodesic_table(const Chain &c)
{
    Table t({"step", "time", "cx", "cy", "radius"});
    std::uint64_t step = 0;
    for (const auto &l : c.links) {
        t.row() << step++ << l.time << l.center.x << l.center.y << l.radius;
    }
    return t;
}

} // namespace slfv

#endif
