#pragma once

#include <stdexcept>
#include <string>

#include <json.hpp>

#include "expr.hpp"
#include "model.hpp"

namespace msrd {

// Syntax errors carry a 1-based line/column; semantic errors carry a JSON pointer.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& msg, int line_, int column_, std::string path_)
        : std::runtime_error(msg), line(line_), column(column_), path(std::move(path_)) {}
    int line = 0;
    int column = 0;
    std::string path;
};

// Converts a byte offset into 1-based (line, column).
std::pair<int, int> line_column(const std::string& text, std::size_t byte_offset);

nlohmann::json parse_json_document(const std::string& text);

NetworkSpec network_from_json(const nlohmann::json& j, const std::string& base_path = "");
nlohmann::json network_to_json(const NetworkSpec& spec);

NetworkSpec parse_network(const std::string& text);
std::string serialize_network(const NetworkSpec& spec);

// Initial condition of the spec as closed forms; throws ParseError on bad expressions.
struct InitialForms {
    ClosedForm c;
    ClosedForm d;
};
InitialForms initial_forms(const NetworkSpec& spec);

}  // namespace msrd
