#pragma once

#include "sspd/measures.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <string_view>

namespace sspd {

/// Point-cloud files.
///
/// JSON: {"mode":"euclidean","dim":2,"points":[[x,y],...],"weights":[...]}
///       or {"mode":"opaque","items":[id,...],"weights":[...]}; "weights" is
///       optional and defaults to uniform.
/// CSV:  header `x1,...,xn[,w]`, then one point per row.
PointCloud cloud_from_json(const nlohmann::json& doc, Ingest ingest = Ingest::Normalize);
nlohmann::json cloud_to_json(const PointCloud& cloud);

PointCloud cloud_from_csv(std::string_view text, Ingest ingest = Ingest::Normalize);
std::string cloud_to_csv(const PointCloud& cloud);

/// Dispatches on the file extension (.json or .csv).
PointCloud read_cloud(const std::filesystem::path& path, Ingest ingest = Ingest::Normalize);
void write_cloud(const std::filesystem::path& path, const PointCloud& cloud);

std::string read_text_file(const std::filesystem::path& path);

}  // namespace sspd
