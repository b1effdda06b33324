// Shared helpers for the test binaries: temporary directories, the three
// fixture databases, and paths into the source tree.

#pragma once

#include <sqlite3.h>

#include <cstdlib>
#include <filesystem>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace testsupport {

inline std::filesystem::path source_dir() {
    return std::filesystem::path(SCHEMALINK_SOURCE_DIR);
}

inline std::filesystem::path fixtures_dir() {
    return source_dir() / "tests" / "fixtures";
}

inline std::filesystem::path prompts_dir() {
    return source_dir() / "prompts";
}

// Creates a unique directory under the system temp root and removes it on
// destruction.
class TempDir {
public:
    explicit TempDir(const std::string& prefix = "schemalink-test") {
        auto base = std::filesystem::temp_directory_path();
        std::mt19937_64 rng(std::random_device{}());
        for (int attempt = 0; attempt < 64; ++attempt) {
            auto candidate = base / (prefix + "-" + std::to_string(rng()));
            std::error_code ec;
            if (std::filesystem::create_directory(candidate, ec)) {
                path_ = candidate;
                return;
            }
        }
        throw std::runtime_error("cannot create a temporary directory");
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

inline void exec_all(sqlite3* db, const std::vector<std::string>& statements) {
    for (const auto& sql : statements) {
        char* err = nullptr;
        if (sqlite3_exec(db, sql.c_str(), nullptr, nullptr, &err) != SQLITE_OK) {
            std::string msg = err != nullptr ? err : "unknown error";
            sqlite3_free(err);
            throw std::runtime_error("fixture SQL failed: " + msg + " in: " + sql);
        }
    }
}

inline void build_database(const std::filesystem::path& path,
                           const std::vector<std::string>& statements) {
    std::filesystem::create_directories(path.parent_path());
    sqlite3* db = nullptr;
    if (sqlite3_open(path.string().c_str(), &db) != SQLITE_OK) {
        if (db != nullptr) sqlite3_close(db);
        throw std::runtime_error("cannot create fixture database " + path.string());
    }
    try {
        exec_all(db, statements);
    } catch (...) {
        sqlite3_close(db);
        throw;
    }
    sqlite3_close(db);
}

inline void build_thrombosis(const std::filesystem::path& path) {
    build_database(path, {
        "PRAGMA foreign_keys = ON;",
        "CREATE TABLE Patient (ID INTEGER PRIMARY KEY, SEX TEXT, Birthday DATE);",
        "CREATE TABLE Examination (ID INTEGER, \"Examination Date\" DATE, KCT TEXT,"
        " Thrombosis INTEGER, FOREIGN KEY (ID) REFERENCES Patient(ID));",
        "CREATE TABLE Laboratory (ID INTEGER, Date DATE, \"T-CHO\" INTEGER, GOT INTEGER,"
        " FOREIGN KEY (ID) REFERENCES Patient(ID));",
        "INSERT INTO Patient VALUES (1,'F','1970-01-01'),(2,'M','1963-05-11'),"
        "(3,'F','1982-09-27'),(4,'M','1955-12-02'),(5,'F','1990-03-15');",
        "INSERT INTO Examination VALUES (1,'1997-05-27','-',1),(2,'1996-12-02','+',0),"
        "(3,'1998-01-20','-',0),(4,'1997-08-14','+',2),(5,'1999-02-03','-',1);",
        "INSERT INTO Laboratory VALUES (1,'1997-05-20',260,22),(2,'1996-11-28',180,31),"
        "(3,'1998-01-11',255,18),(4,'1997-08-01',240,45),(5,'1999-01-29',300,27);",
    });
}

inline void build_toxicology(const std::filesystem::path& path) {
    build_database(path, {
        "PRAGMA foreign_keys = ON;",
        "CREATE TABLE molecule (molecule_id TEXT PRIMARY KEY, label TEXT);",
        "CREATE TABLE atom (atom_id TEXT PRIMARY KEY, molecule_id TEXT, element TEXT,"
        " FOREIGN KEY (molecule_id) REFERENCES molecule(molecule_id));",
        "CREATE TABLE bond (bond_id TEXT PRIMARY KEY, molecule_id TEXT, bond_type TEXT,"
        " FOREIGN KEY (molecule_id) REFERENCES molecule(molecule_id));",
        "CREATE TABLE connected (atom_id TEXT, atom_id2 TEXT, bond_id TEXT,"
        " PRIMARY KEY (atom_id, atom_id2),"
        " FOREIGN KEY (atom_id) REFERENCES atom(atom_id),"
        " FOREIGN KEY (atom_id2) REFERENCES atom(atom_id),"
        " FOREIGN KEY (bond_id) REFERENCES bond(bond_id));",
        "INSERT INTO molecule VALUES ('TR001','+'),('TR002','-'),('TR003','+');",
        "INSERT INTO atom VALUES ('TR001_1','TR001','cl'),('TR001_8','TR001','c'),"
        "('TR002_1','TR002','o'),('TR002_2','TR002','n'),('TR003_1','TR003','c');",
        "INSERT INTO bond VALUES ('TR001_1_8','TR001','1'),('TR002_1_2','TR002','2');",
        "INSERT INTO connected VALUES ('TR001_1','TR001_8','TR001_1_8'),"
        "('TR001_8','TR001_1','TR001_1_8'),('TR002_1','TR002_2','TR002_1_2');",
    });
}

inline void build_financial(const std::filesystem::path& path) {
    build_database(path, {
        "PRAGMA foreign_keys = ON;",
        "CREATE TABLE district (district_id INTEGER PRIMARY KEY, A2 TEXT, A3 TEXT);",
        "CREATE TABLE client (client_id INTEGER PRIMARY KEY, gender TEXT, district_id INTEGER,"
        " FOREIGN KEY (district_id) REFERENCES district(district_id));",
        "CREATE TABLE disp (disp_id INTEGER PRIMARY KEY, client_id INTEGER, account_id INTEGER,"
        " type TEXT, FOREIGN KEY (client_id) REFERENCES client(client_id));",
        "INSERT INTO district VALUES (1,'Pisek','south Bohemia'),(2,'Praha','Prague'),"
        "(3,'Tabor','south Bohemia');",
        "INSERT INTO client VALUES (10,'F',1),(11,'M',2),(12,'F',3),(13,'M',1);",
        "INSERT INTO disp VALUES (100,10,500,'OWNER'),(101,10,500,'DISPONENT'),"
        "(102,11,501,'OWNER'),(103,12,502,'DISPONENT'),(104,13,503,'DISPONENT');",
    });
}

// Lays out <root>/<db_id>/<db_id>.sqlite for the three fixture databases.
inline void build_fixture_data_root(const std::filesystem::path& root) {
    build_thrombosis(root / "thrombosis_prediction" / "thrombosis_prediction.sqlite");
    build_toxicology(root / "toxicology" / "toxicology.sqlite");
    build_financial(root / "financial" / "financial.sqlite");
}

}  // namespace testsupport
