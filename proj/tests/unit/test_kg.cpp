#include "reportkg/error.hpp"
#include "reportkg/kg.hpp"
#include "reportkg/turtle.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace reportkg;
using namespace reportkg::kg;
using rdf::Term;

namespace {

Term iri(const std::string& v) { return Term::iri(v); }
Variable var(const std::string& name) { return Variable{name}; }

ReportMeta tasi_1234() {
    ReportMeta meta;
    meta.reference = "TASI-1234";
    meta.name = "test_report_xy";
    meta.date = "2023-06-15";
    meta.location = "path/to/test_report_file.docx";
    meta.validation = ReportStatus::OK;
    meta.reported_properties = {rdf::tasi("POLVoltage"), rdf::tasi("InternalIsolation")};
    return meta;
}

std::set<Triple> as_set(const std::vector<Triple>& triples) { return {triples.begin(), triples.end()}; }

}  // namespace

TEST(Turtle, ReportMetadataFixture) {
    TripleStore store;
    const auto added = store.load_turtle(support::read_file(support::fixture("report_metadata.ttl")));
    EXPECT_EQ(added, store.size());
    EXPECT_TRUE(store.contains({iri(rdf::tasi("InternalIsolation")), iri(rdf::rdfs_subclass_of()), iri(rdf::tasi("Isolation"))}));
    EXPECT_TRUE(store.contains({iri(rdf::tasi("POLVoltage")), iri(rdf::rdfs_label()), Term::lang_literal("P.O.L. Voltage", "en")}));
    EXPECT_TRUE(store.contains({iri("http://tasi.com#TASI-1234"), iri(rdf::tasi("testReportDate")),
                                Term::literal("2023-06-15", rdf::xsd("dateTime"))}));
}

TEST(Turtle, ObservationFixtureHasEightTriples) {
    TripleStore store;
    store.load_turtle(support::read_file(support::fixture("pol_observation.ttl")));
    const auto about = store.match({iri("http://tasi.com/pol#TASI-1234-Core1"), var("p"), var("o")});
    EXPECT_EQ(about.size(), 8u);
    EXPECT_TRUE(store.contains({iri("http://tasi.com/pol#TASI-1234-Core1"), iri(rdf::sosa("hasSimpleResult")),
                                Term::literal("1.097 V", std::string(rdf::ns::cdt) + "ucum")}));
}

TEST(Turtle, EmptyAndDuplicates) {
    TripleStore store;
    EXPECT_EQ(store.load_turtle(""), 0u);
    EXPECT_EQ(store.load_turtle("# nothing here\n"), 0u);
    EXPECT_EQ(store.load_turtle("tasi:a tasi:b tasi:c , tasi:c .\ntasi:a tasi:b tasi:c ."), 1u);
    EXPECT_EQ(store.size(), 1u);
}

TEST(Turtle, ParseErrorsCarryLineAndColumn) {
    try {
        rdf::parse_turtle("tasi:a tasi:b tasi:c .\ntasi:a tasi:b .");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::ParseError);
        EXPECT_NE(std::string(e.what()).find("2:"), std::string::npos) << e.what();
    }
    try {
        rdf::parse_turtle("nope:a tasi:b tasi:c .");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::ParseError);
    }
}

TEST(Turtle, LiteralForms) {
    const auto parsed = rdf::parse_turtle(
        "tasi:x tasi:s 'single \\' quote', \"tab\\there\", \"caf\\u00e9\"@fr, 42, 1.5, true .");
    ASSERT_EQ(parsed.triples.size(), 6u);
    EXPECT_EQ(parsed.triples[0].object, Term::literal("single ' quote"));
    EXPECT_EQ(parsed.triples[1].object, Term::literal("tab\there"));
    EXPECT_EQ(parsed.triples[2].object, Term::lang_literal("café", "fr"));
    EXPECT_EQ(parsed.triples[3].object, Term::literal("42", rdf::xsd("integer")));
    EXPECT_EQ(parsed.triples[4].object, Term::literal("1.5", rdf::xsd("decimal")));
    EXPECT_EQ(parsed.triples[5].object, Term::literal("true", rdf::xsd("boolean")));
}

TEST(Turtle, SerializeLoadFixpointOnAllFixtures) {
    for (const auto& path : {support::fixture("report_metadata.ttl"), support::fixture("pol_observation.ttl"),
                             support::source_dir() / "data" / "ontology.ttl"}) {
        TripleStore store;
        store.load_turtle(support::read_file(path));
        const std::string once = store.serialize();
        TripleStore again;
        again.load_turtle(once);
        EXPECT_EQ(as_set(again.triples()), as_set(store.triples())) << path;
        EXPECT_EQ(again.serialize(), once) << path;
    }
}

TEST(Match, Examples) {
    TripleStore store;
    store.register_report(tasi_1234());
    const auto reports = store.match({var("r"), iri(rdf::rdf_type()), iri(rdf::tasi("TestReport"))});
    ASSERT_EQ(reports.size(), 1u);
    EXPECT_EQ(reports[0].at("r"), iri("http://tasi.com#TASI-1234"));

    const auto bound = store.match({iri("http://tasi.com#TASI-1234"), iri(rdf::rdf_type()), iri(rdf::tasi("TestReport"))});
    ASSERT_EQ(bound.size(), 1u);
    EXPECT_TRUE(bound[0].empty());

    TripleStore empty;
    EXPECT_TRUE(empty.match({var("s"), var("p"), var("o")}).empty());
}

TEST(Match, AllVariablesReturnsEveryTripleInOrder) {
    TripleStore store;
    store.load_turtle(support::read_file(support::fixture("report_metadata.ttl")));
    const auto all = store.match({var("s"), var("p"), var("o")});
    ASSERT_EQ(all.size(), store.size());
    for (std::size_t i = 1; i < all.size(); ++i) {
        const Triple a{all[i - 1].at("s"), all[i - 1].at("p"), all[i - 1].at("o")};
        const Triple b{all[i].at("s"), all[i].at("p"), all[i].at("o")};
        EXPECT_LT(a, b);
    }
    // A repeated variable only matches equal terms.
    EXPECT_TRUE(store.match({var("x"), var("p"), var("x")}).empty());
}

TEST(RegisterReport, MetadataShapeAndRoundTrip) {
    TripleStore store;
    const auto triples = store.register_report(tasi_1234());
    EXPECT_EQ(triples.size(), 8u);

    TripleStore expected;
    expected.load_turtle(support::read_file(support::fixture("report_metadata.ttl")));
    const auto listing = expected.match({iri("http://tasi.com#TASI-1234"), var("p"), var("o")});
    ASSERT_EQ(listing.size(), 8u);
    for (const auto& b : listing) {
        EXPECT_TRUE(store.contains({iri("http://tasi.com#TASI-1234"), b.at("p"), b.at("o")}))
            << b.at("p").value << " " << b.at("o").value;
    }
    const auto read_back = store.report("TASI-1234");
    ASSERT_TRUE(read_back);
    const auto meta = tasi_1234();
    EXPECT_EQ(read_back->name, meta.name);
    EXPECT_EQ(read_back->date, meta.date);
    EXPECT_EQ(read_back->location, meta.location);
    EXPECT_EQ(read_back->validation, meta.validation);
    // Properties come back in IRI order.
    EXPECT_EQ(std::set<std::string>(read_back->reported_properties.begin(), read_back->reported_properties.end()),
              std::set<std::string>(meta.reported_properties.begin(), meta.reported_properties.end()));
}

TEST(RegisterReport, DegenerateDuplicateAndUpdate) {
    TripleStore store;
    auto meta = tasi_1234();
    meta.reported_properties.clear();
    EXPECT_EQ(store.register_report(meta).size(), 6u);
    try {
        store.register_report(meta);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::DuplicateReport);
    }
    meta.name = "renamed";
    store.register_report(meta, true);
    EXPECT_EQ(store.report("TASI-1234")->name, "renamed");
    EXPECT_EQ(store.size(), 6u);

    store.set_report_validation("TASI-1234", ReportStatus::Anomalous);
    EXPECT_EQ(store.report("TASI-1234")->validation, ReportStatus::Anomalous);
    try {
        store.set_report_validation("TASI-0000", ReportStatus::OK);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::UnknownReport);
    }
}

TEST(Subclasses, Examples) {
    TripleStore store;
    store.load_turtle(support::read_file(support::fixture("report_metadata.ttl")));
    EXPECT_EQ(store.subclasses_of(rdf::tasi("Isolation")),
              (std::set<std::string>{rdf::tasi("Isolation"), rdf::tasi("InternalIsolation"), rdf::tasi("ExternalIsolation")}));
    EXPECT_EQ(store.subclasses_of(rdf::tasi("POLVoltage")), (std::set<std::string>{rdf::tasi("POLVoltage")}));

    TripleStore cyclic;
    cyclic.load_turtle("tasi:A rdfs:subClassOf tasi:B . tasi:B rdfs:subClassOf tasi:C . tasi:C rdfs:subClassOf tasi:A .");
    EXPECT_EQ(cyclic.subclasses_of(rdf::tasi("A")),
              (std::set<std::string>{rdf::tasi("A"), rdf::tasi("B"), rdf::tasi("C")}));
}

TEST(Subclasses, MonotoneUnderAddedAxioms) {
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<int> node(0, 11);
    for (int trial = 0; trial < 50; ++trial) {
        TripleStore store;
        for (int step = 0; step < 20; ++step) {
            std::map<int, std::set<std::string>> before;
            for (int n = 0; n < 12; ++n) {
                before[n] = store.subclasses_of(rdf::tasi("N" + std::to_string(n)));
            }
            const Triple axiom{iri(rdf::tasi("N" + std::to_string(node(rng)))), iri(rdf::rdfs_subclass_of()),
                               iri(rdf::tasi("N" + std::to_string(node(rng))))};
            store.insert(std::span(&axiom, 1));
            for (int n = 0; n < 12; ++n) {
                const auto after = store.subclasses_of(rdf::tasi("N" + std::to_string(n)));
                EXPECT_TRUE(std::includes(after.begin(), after.end(), before[n].begin(), before[n].end()));
            }
        }
    }
}

TEST(StructureDefs, LocationsAndHints) {
    TripleStore listing;
    listing.load_turtle(support::read_file(support::fixture("report_metadata.ttl")));
    const auto pol = listing.structure_def(rdf::tasi("POLVoltage"));
    ASSERT_TRUE(pol);
    EXPECT_EQ(pol->results_location, "/VALIDATED/pol/pol.parquet");
    EXPECT_EQ(pol->acceptance_limits_location, "VALIDATED/ist/TASI-1234-ist_pol.csv");
    EXPECT_EQ(listing.incomplete_structure_defs(), (std::vector<std::string>{rdf::tasi("ExternalIsolation")}));

    TripleStore shipped;
    shipped.load_turtle(support::read_file(support::source_dir() / "data" / "ontology.ttl"));
    EXPECT_TRUE(shipped.incomplete_structure_defs().empty());
    EXPECT_EQ(shipped.observable_properties(),
              (std::set<std::string>{rdf::tasi("POLVoltage"), rdf::tasi("Isolation"), rdf::tasi("InternalIsolation"),
                                     rdf::tasi("ExternalIsolation")}));
    const auto hints = shipped.structure_def(rdf::tasi("POLVoltage"))->header_hints;
    EXPECT_EQ(hints.at("MeasuredValue"), (std::vector<std::string>{"Voltage Measurements"}));
}

TEST(Bgp, JoinAcrossPatterns) {
    TripleStore store;
    store.load_turtle(support::read_file(support::fixture("report_metadata.ttl")));
    const std::vector<TriplePattern> patterns = {
        {var("r"), iri(rdf::tasi("reports")), var("t")},
        {var("t"), iri(rdf::rdfs_label()), var("label")},
    };
    const auto rows = evaluate_bgp(patterns, [&](const TriplePattern& p) { return store.find(p); });
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[0].at("label"), Term::lang_literal("Internal Isolation", "en"));
    EXPECT_EQ(rows[1].at("label"), Term::lang_literal("P.O.L. Voltage", "en"));
}
