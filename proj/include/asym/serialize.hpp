#pragma once

#include <filesystem>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "asym/feasibility.hpp"
#include "asym/kidecomp.hpp"
#include "asym/monotones.hpp"
#include "asym/protocols.hpp"

namespace asym::io {

using Json = nlohmann::json;

/// Rejects any key of `obj` not in `allowed`; `context` names the object in messages.
void require_fields(const Json& obj, std::initializer_list<std::string_view> allowed, const std::string& context);
void require_object(const Json& obj, const std::string& context);

/// Real matrices as nested arrays, complex ones as {"re": [...], "im": [...]}.
Json to_json(const ComplexMatrix& m);
ComplexMatrix matrix_from_json(const Json& j, const std::string& context);
ComplexVector vector_from_json(const Json& j, const std::string& context);

/// One of {"basis": k, "dim": d}, {"diagonal": [...]}, {"maximally_mixed": d},
/// {"uniform": d}, {"pure": vector}, {"matrix": matrix}.
DensityMatrix state_from_json(const Json& j, const std::string& context);
/// {"energies": [...]} or {"matrix": matrix}.
Hamiltonian hamiltonian_from_json(const Json& j, const std::string& context);
/// {"type": "time_translation", "energies"}, {"type": "cyclic", "order", "energies"}
/// or {"type": "permutation", "n"}.
GroupAction group_from_json(const Json& j, const std::string& context);

Json to_json(const FeasibilityReport& r);
Json to_json(const ScanPoint& p);
Json to_json(const CloningChainReport& r);
Json to_json(const KIDecomposition& d);
Json to_json(const SpectrumReport& r);
Json to_json(const LadderTrace& t);
Json to_json(const ClockRow& r);
Json to_json(const BatteryReport& r);

/// Comma-separated rows with a header; numbers use 17 significant digits.
std::string to_csv(const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows);
std::string ladder_csv(const LadderTrace& t);

/// Pretty JSON with a trailing newline. Keys are sorted, so output is canonical.
std::string dump(const Json& j);

std::string sha256_hex(std::string_view data);

void write_file(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

}  // namespace asym::io
