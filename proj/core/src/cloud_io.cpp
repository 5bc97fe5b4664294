#include "sspd/cloud_io.hpp"

#include "sspd/error.hpp"

#include <fmt/format.h>

#include <charconv>
#include <fstream>
#include <sstream>
#include <vector>

namespace sspd {
namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    for (;;) {
        const std::size_t comma = line.find(',', start);
        fields.push_back(trim(line.substr(start, comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return fields;
}

double parse_double(std::string_view field, std::size_t line_no) {
    double value = 0.0;
    if (!field.empty() && field.front() == '+') field.remove_prefix(1);
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || ptr != field.data() + field.size())
        throw FormatError(fmt::format("line {}: cannot parse number '{}'", line_no, field));
    return value;
}

}  // namespace

PointCloud cloud_from_json(const nlohmann::json& doc, Ingest ingest) {
    try {
        const std::string mode = doc.value("mode", std::string("euclidean"));
        const bool has_weights = doc.contains("weights");

        if (mode == "opaque") {
            std::vector<ItemHandle> items;
            for (const auto& id : doc.at("items")) items.push_back(ItemHandle{id.get<std::uint64_t>()});
            Eigen::VectorXd weights = Eigen::VectorXd::Constant(
                static_cast<Eigen::Index>(items.size()), items.empty() ? 0.0 : 1.0 / items.size());
            if (has_weights) {
                const auto w = doc.at("weights").get<std::vector<double>>();
                weights = Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
            }
            return PointCloud::opaque(std::move(items), std::move(weights), ingest);
        }
        if (mode != "euclidean") throw FormatError(fmt::format("unknown cloud mode '{}'", mode));

        const auto rows = doc.at("points").get<std::vector<std::vector<double>>>();
        if (rows.empty()) throw FormatError("cloud has no points");
        const auto dim = static_cast<Eigen::Index>(doc.contains("dim") ? doc.at("dim").get<std::size_t>()
                                                                        : rows.front().size());
        Eigen::MatrixXd points(dim, static_cast<Eigen::Index>(rows.size()));
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (static_cast<Eigen::Index>(rows[i].size()) != dim)
                throw FormatError(fmt::format("point {} has {} coordinates, expected {}", i,
                                              rows[i].size(), dim));
            for (Eigen::Index k = 0; k < dim; ++k) points(k, static_cast<Eigen::Index>(i)) = rows[i][k];
        }
        if (!has_weights) return PointCloud::euclidean(std::move(points), ingest);
        const auto w = doc.at("weights").get<std::vector<double>>();
        Eigen::VectorXd weights =
            Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
        return PointCloud::euclidean(std::move(points), std::move(weights), ingest);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(fmt::format("invalid cloud JSON: {}", e.what()));
    }
}

nlohmann::json cloud_to_json(const PointCloud& cloud) {
    nlohmann::json doc;
    std::vector<double> weights(cloud.weights().data(), cloud.weights().data() + cloud.size());
    if (cloud.mode() == PointMode::Opaque) {
        doc["mode"] = "opaque";
        auto& items = doc["items"] = nlohmann::json::array();
        for (const auto& item : cloud.items()) items.push_back(item.id);
    } else {
        doc["mode"] = "euclidean";
        doc["dim"] = cloud.dim();
        auto& points = doc["points"] = nlohmann::json::array();
        for (Eigen::Index i = 0; i < cloud.size(); ++i) {
            const Eigen::VectorXd p = cloud.points().col(i);
            points.push_back(std::vector<double>(p.data(), p.data() + p.size()));
        }
    }
    doc["weights"] = weights;
    return doc;
}

PointCloud cloud_from_csv(std::string_view text, Ingest ingest) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        const auto line = trim(text.substr(start, end - start));
        if (!line.empty()) lines.push_back(line);
        start = end + 1;
    }
    if (lines.empty()) throw FormatError("empty CSV cloud");

    const auto header = split_fields(lines.front());
    const bool weighted = header.size() >= 2 && header.back() == "w";
    const auto dim = static_cast<Eigen::Index>(header.size() - (weighted ? 1 : 0));
    for (Eigen::Index k = 0; k < dim; ++k) {
        if (header[static_cast<std::size_t>(k)] != fmt::format("x{}", k + 1))
            throw FormatError(fmt::format("CSV header must be x1,...,xn[,w]; got '{}'", lines.front()));
    }
    const auto count = static_cast<Eigen::Index>(lines.size() - 1);
    if (count < 1) throw FormatError("CSV cloud has no points");

    Eigen::MatrixXd points(dim, count);
    Eigen::VectorXd weights(count);
    for (Eigen::Index i = 0; i < count; ++i) {
        const auto fields = split_fields(lines[static_cast<std::size_t>(i + 1)]);
        if (fields.size() != header.size())
            throw FormatError(fmt::format("line {}: expected {} fields, got {}", i + 2, header.size(),
                                          fields.size()));
        for (Eigen::Index k = 0; k < dim; ++k)
            points(k, i) = parse_double(fields[static_cast<std::size_t>(k)], static_cast<std::size_t>(i + 2));
        if (weighted) weights(i) = parse_double(fields.back(), static_cast<std::size_t>(i + 2));
    }
    if (!weighted) return PointCloud::euclidean(std::move(points), ingest);
    return PointCloud::euclidean(std::move(points), std::move(weights), ingest);
}

std::string cloud_to_csv(const PointCloud& cloud) {
    if (cloud.mode() != PointMode::Euclidean) throw ModeError("CSV export requires a Euclidean cloud");
    std::string out;
    for (Eigen::Index k = 0; k < cloud.dim(); ++k) out += fmt::format("x{},", k + 1);
    out += "w\n";
    for (Eigen::Index i = 0; i < cloud.size(); ++i) {
        for (Eigen::Index k = 0; k < cloud.dim(); ++k) out += fmt::format("{},", cloud.points()(k, i));
        out += fmt::format("{}\n", cloud.weights()(i));
    }
    return out;
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError(fmt::format("cannot open '{}'", path.string()));
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

PointCloud read_cloud(const std::filesystem::path& path, Ingest ingest) {
    const std::string text = read_text_file(path);
    const auto ext = path.extension().string();
    if (ext == ".csv") return cloud_from_csv(text, ingest);
    if (ext == ".json") {
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(text);
        } catch (const nlohmann::json::exception& e) {
            throw FormatError(fmt::format("{}: {}", path.string(), e.what()));
        }
        return cloud_from_json(doc, ingest);
    }
    throw FormatError(fmt::format("unsupported cloud file extension '{}'", ext));
}

void write_cloud(const std::filesystem::path& path, const PointCloud& cloud) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError(fmt::format("cannot write '{}'", path.string()));
    if (path.extension() == ".csv")
        out << cloud_to_csv(cloud);
    else
        out << cloud_to_json(cloud).dump(2) << '\n';
}

}  // namespace sspd
