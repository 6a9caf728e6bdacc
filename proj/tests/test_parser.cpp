#include <doctest.h>

#include <optional>
#include <random>
#include <string>
#include <vector>

#include "peerscout/corpus.hpp"
#include "peerscout/prompt.hpp"

using namespace peerscout;

namespace {

struct Shape {
    const char* name;
    const char* raw;
    // nullopt: unparseable. Empty vector: parses to the empty set.
    std::optional<std::vector<std::string>> expected;
};

// Hand-enumerated response shapes, pinned before the parser existed.
const Shape kShapes[] = {
    {"canonical single-quoted",
     "{{'PRODUCT': ['plant nutrients', 'iodine', 'lithium', 'industrial chemicals']}}",
     std::vector<std::string>{"industrial chemicals", "iodine", "lithium",
                              "plant nutrients"}},
    {"none literal", "{{'PRODUCT': None}}", std::vector<std::string>{}},
    {"empty list", "{{'PRODUCT': []}}", std::vector<std::string>{}},
    {"single braces", "{'PRODUCT': ['satellites']}",
     std::vector<std::string>{"satellites"}},
    {"double-quoted json", "{\"PRODUCT\": [\"satellites\"]}",
     std::vector<std::string>{"satellites"}},
    {"surrounding prose",
     "Sure! Here is the output: {\"PRODUCT\": [\"satellites\"]} Hope that helps.",
     std::vector<std::string>{"satellites"}},
    {"output prefix", "Output: {{'PRODUCT': ['GPS technology']}}",
     std::vector<std::string>{"gps technology"}},
    {"internal whitespace", "{{ 'PRODUCT' : [ 'a' , 'b' ] }}",
     std::vector<std::string>{"a", "b"}},
    {"lowercase key", "{{'product': ['oil']}}", std::vector<std::string>{"oil"}},
    {"null literal", "{{'PRODUCT': null}}", std::vector<std::string>{}},
    {"duplicate items", "{{'PRODUCT': ['oil', 'Oil', ' oil ']}}",
     std::vector<std::string>{"oil"}},
    {"padded items", "{{'PRODUCT': ['  natural gas  ']}}",
     std::vector<std::string>{"natural gas"}},
    {"escaped quote", "{{'PRODUCT': ['it\\'s a phone']}}",
     std::vector<std::string>{"it's a phone"}},
    {"none inside list", "{{'PRODUCT': [None]}}", std::vector<std::string>{}},
    {"unquoted atoms", "{{'PRODUCT': [oil, natural gas]}}",
     std::vector<std::string>{"natural gas", "oil"}},
    {"first construct wins",
     "{{'PRODUCT': ['first']}} and later {{'PRODUCT': ['second']}}",
     std::vector<std::string>{"first"}},
    {"trailing comma", "{{'PRODUCT': ['oil', ]}}", std::vector<std::string>{"oil"}},
    {"no braces at all", "The company sells oil and gas.", std::nullopt},
    {"wrong key", "{{'ENTITIES': ['oil']}}", std::nullopt},
    {"unterminated list", "{{'PRODUCT': ['oil', 'gas'", std::nullopt},
};

std::string random_item(std::mt19937_64& rng) {
    static constexpr char charset[] = "abcdefghijklmnopqrstuvwxyz0123456789-'\\";
    const std::size_t words = 1 + rng() % 3;
    std::string item;
    for (std::size_t w = 0; w < words; ++w) {
        if (w) item += ' ';
        const std::size_t len = 1 + rng() % 8;
        for (std::size_t i = 0; i < len; ++i) {
            item += charset[rng() % (sizeof(charset) - 1)];
        }
    }
    return item;
}

}  // namespace

TEST_CASE("parser handles all twenty pinned response shapes") {
    REQUIRE(std::size(kShapes) == 20);
    for (const auto& shape : kShapes) {
        CAPTURE(shape.name);
        const auto parsed = parse_output(RawModelOutput{shape.raw});
        if (!shape.expected) {
            CHECK_FALSE(parsed.has_value());
            continue;
        }
        REQUIRE(parsed.has_value());
        std::vector<std::string> items(parsed->begin(), parsed->end());
        CHECK(items == *shape.expected);
    }
}

TEST_CASE("grammar round-trip holds on random product sets") {
    std::mt19937_64 rng(777);
    for (int i = 0; i < 10000; ++i) {
        ProductSet original;
        const std::size_t count = rng() % 6;
        for (std::size_t k = 0; k < count; ++k) original.insert(random_item(rng));

        const auto rendered = format_output_value(original);
        const auto parsed = parse_output(rendered);
        REQUIRE(parsed.has_value());
        CHECK(*parsed == original);
    }
}

TEST_CASE("round-trip survives prose wrapping") {
    const auto set = ProductSet::from_strings({"oil", "natural gas", "it's"});
    const auto wrapped = "The extracted entities are " + format_output_value(set) +
                         " as requested.";
    const auto parsed = parse_output(wrapped);
    REQUIRE(parsed.has_value());
    CHECK(*parsed == set);
}
