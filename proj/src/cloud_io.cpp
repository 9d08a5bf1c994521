#include <charconv>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "lsa/geometry.hpp"

namespace lsa {

namespace {

std::string shortest(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
    out.push_back(cell);
  }
  return out;
}

}  // namespace

std::string cloud_to_csv(const PointCloud& cloud) {
  std::string out;
  for (int k = 0; k < cloud.dim(); ++k) {
    out += (k ? ",x" : "x") + std::to_string(k + 1);
  }
  out += '\n';
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    for (int k = 0; k < cloud.dim(); ++k) {
      if (k) out += ',';
      out += shortest(cloud.point(i)[k]);
    }
    out += '\n';
  }
  return out;
}

void write_cloud(const PointCloud& cloud, const std::string& csv_path) {
  std::ofstream csv(csv_path);
  if (!csv) throw InvalidInput("cannot write " + csv_path);
  csv << cloud_to_csv(cloud);

  nlohmann::json meta;
  meta["n"] = cloud.dim();
  meta["h"] = cloud.h();
  if (cloud.window()) {
    const auto& w = *cloud.window();
    meta["window"] = {{"center", std::vector<double>(w.center.data(), w.center.data() + w.dim())},
                      {"radius", w.radius}};
  } else {
    meta["window"] = nullptr;
  }
  std::ofstream side(csv_path + ".json");
  if (!side) throw InvalidInput("cannot write " + csv_path + ".json");
  side << meta.dump(2) << '\n';
}

PointCloud read_cloud(const std::string& csv_path) {
  std::ifstream csv(csv_path);
  if (!csv) throw InvalidInput("cannot open " + csv_path);
  std::string line;
  if (!std::getline(csv, line)) throw InvalidInput(csv_path + ": missing header");
  const auto header = split(line);
  const int n = static_cast<int>(header.size());
  for (int k = 0; k < n; ++k) {
    if (header[k] != "x" + std::to_string(k + 1)) {
      throw InvalidInput(csv_path + ": header must be x1,...,xn");
    }
  }
  std::vector<double> coords;
  std::size_t row = 1;
  while (std::getline(csv, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    const auto cells = split(line);
    if (static_cast<int>(cells.size()) != n) {
      throw InvalidInput(csv_path + ": wrong column count on row " + std::to_string(row));
    }
    for (const auto& c : cells) {
      double v = 0.0;
      auto res = std::from_chars(c.data(), c.data() + c.size(), v);
      if (res.ec != std::errc() || res.ptr != c.data() + c.size()) {
        throw InvalidInput(csv_path + ": bad number '" + c + "' on row " + std::to_string(row));
      }
      coords.push_back(v);
    }
  }

  double h = 0.0;
  std::optional<Ball> window;
  std::ifstream side(csv_path + ".json");
  if (side) {
    nlohmann::json meta;
    try {
      side >> meta;
    } catch (const nlohmann::json::exception& e) {
      throw InvalidInput(csv_path + ".json: " + e.what());
    }
    if (meta.contains("n") && meta["n"].get<int>() != n) {
      throw InvalidInput(csv_path + ".json: n disagrees with the CSV header");
    }
    h = meta.value("h", 0.0);
    if (meta.contains("window") && !meta["window"].is_null()) {
      const auto c = meta["window"]["center"].get<std::vector<double>>();
      window = Ball(Eigen::Map<const Eigen::VectorXd>(c.data(), c.size()),
                    meta["window"]["radius"].get<double>());
    }
  }
  if (coords.empty()) return PointCloud::empty(n, h, window);
  return PointCloud(n, std::move(coords), h, window);
}

}  // namespace lsa
