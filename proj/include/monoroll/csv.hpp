#pragma once

#include <fstream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "monoroll/config.hpp"
#include "monoroll/errors.hpp"
#include "monoroll/estimator.hpp"
#include "monoroll/kinematics.hpp"

namespace monoroll::csv {

inline constexpr std::string_view log_header = "t,theta_m,omega_m,ax,ay,az,gamma,beta,alpha";
inline constexpr std::string_view torque_header = "t,tau_m";
inline constexpr std::string_view truth_header = "t,d_b_true,d_a_true,theta_n_true,F_true";
inline constexpr std::string_view estimate_header = "t,d_a,theta_n,d_b,alpha_g,branch";
inline constexpr std::string_view trajectory_header = "t,x,y";
inline constexpr std::string_view force_header = "t,F_n";

inline std::vector<std::string> split(std::string_view line) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    const auto comma = line.find(',', pos);
    out.emplace_back(line.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

/// Numeric table with a mandatory, exactly matching header row. Errors name
/// the file, the 1-based data row and the column.
inline std::vector<std::vector<double>> read_numeric(const std::string& path, std::string_view header) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path + "'");
  const auto columns = split(header);

  std::string line;
  if (!std::getline(in, line)) throw MalformedInput(path + ": missing header row");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != header)
    throw MalformedInput(path + ": header mismatch, expected '" + std::string(header) + "', got '" + line + "'");

  std::vector<std::vector<double>> rows;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    ++row;
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != columns.size())
      throw MalformedInput(path + ": row " + std::to_string(row) + " has " + std::to_string(cells.size()) +
                           " columns, expected " + std::to_string(columns.size()));
    std::vector<double> values(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c)
      if (!detail::parse_double(cells[c], values[c]) || !std::isfinite(values[c]))
        throw MalformedInput(path + ": row " + std::to_string(row) + ", column '" + columns[c] +
                             "': not a finite number: '" + cells[c] + "'");
    rows.push_back(std::move(values));
  }
  return rows;
}

inline std::vector<SensorSample> read_log(const std::string& path) {
  std::vector<SensorSample> out;
  for (const auto& r : read_numeric(path, log_header)) {
    SensorSample s;
    s.t = r[0];
    s.motor_angle = r[1];
    s.motor_velocity = r[2];
    s.accel = Vec3(r[3], r[4], r[5]);
    s.euler = {r[6], r[7], r[8]};
    out.push_back(s);
  }
  return out;
}

inline std::vector<TorqueSample> read_torque(const std::string& path) {
  std::vector<TorqueSample> out;
  for (const auto& r : read_numeric(path, torque_header)) out.push_back({r[0], r[1]});
  return out;
}

/// Accumulates `\n`-terminated rows; numbers in shortest round-trip form.
class Writer {
public:
  explicit Writer(std::string_view header) { text_ << header << '\n'; }

  Writer& cell(double v) {
    sep();
    text_ << detail::format_double(v);
    return *this;
  }

  Writer& cell(std::string_view s) {
    sep();
    if (s.find_first_of(",\"\n") == std::string_view::npos) {
      text_ << s;
    } else {
      text_ << '"';
      for (char ch : s) {
        if (ch == '"') text_ << "\"\"";
        else if (ch == '\n' || ch == '\r') text_ << ' ';
        else text_ << ch;
      }
      text_ << '"';
    }
    return *this;
  }

  Writer& empty() {
    sep();
    return *this;
  }

  void end_row() {
    text_ << '\n';
    first_ = true;
  }

  std::string str() const { return text_.str(); }

  void save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + path + "'");
    out << text_.str();
    if (!out) throw IoError("write failed for '" + path + "'");
  }

private:
  void sep() {
    if (!first_) text_ << ',';
    first_ = false;
  }

  std::ostringstream text_;
  bool first_ = true;
};

inline Writer log_table(std::span<const SensorSample> samples) {
  Writer w(log_header);
  for (const auto& s : samples) {
    w.cell(s.t).cell(s.motor_angle).cell(s.motor_velocity);
    w.cell(s.accel.x()).cell(s.accel.y()).cell(s.accel.z());
    w.cell(s.euler.gamma).cell(s.euler.beta).cell(s.euler.alpha);
    w.end_row();
  }
  return w;
}

inline Writer torque_table(std::span<const TorqueSample> torque) {
  Writer w(torque_header);
  for (const auto& s : torque) {
    w.cell(s.t).cell(s.tau);
    w.end_row();
  }
  return w;
}

inline Writer estimate_table(std::span<const std::optional<MassEstimate>> estimates) {
  Writer w(estimate_header);
  for (const auto& e : estimates) {
    if (!e) continue;
    w.cell(e->t).cell(e->d_a).cell(e->theta_n).cell(e->d_b).cell(e->alpha).cell(to_string(e->branch));
    w.end_row();
  }
  return w;
}

inline Writer trajectory_table(std::span<const TimedDisplacement> trajectory) {
  Writer w(trajectory_header);
  for (const auto& p : trajectory) {
    w.cell(p.t).cell(p.d.x).cell(p.d.y);
    w.end_row();
  }
  return w;
}

inline Writer force_table(std::span<const ForceSample> forces) {
  Writer w(force_header);
  for (const auto& f : forces) {
    w.cell(f.t).cell(f.force);
    w.end_row();
  }
  return w;
}

} // namespace monoroll::csv
