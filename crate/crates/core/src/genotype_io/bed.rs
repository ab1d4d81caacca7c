use std::collections::HashMap;
use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use super::{GenotypeMatrix, SampleRecord, Sex, SnpRecord, MISSING};
use crate::error::{Error, Result};

const MAGIC: [u8; 2] = [0x6C, 0x1B];
const SNP_MAJOR: u8 = 0x01;

// 2-bit code -> dosage of allele1.
const DECODE: [u8; 4] = [2, MISSING, 1, 0];

fn encode(dosage: u8) -> u8 {
    match dosage {
        2 => 0b00,
        1 => 0b10,
        0 => 0b11,
        _ => 0b01,
    }
}

/// A genotype matrix together with its sample and SNP tables.
#[derive(Clone, Debug, PartialEq)]
pub struct PlinkData {
    pub matrix: GenotypeMatrix,
    pub samples: Vec<SampleRecord>,
    pub snps: Vec<SnpRecord>,
}

impl PlinkData {
    /// Sets each sample's population from an `individual_id -> population`
    /// map. Every sample must be present.
    pub fn attach_populations(&mut self, map: &HashMap<String, String>) -> Result<()> {
        for s in &mut self.samples {
            let pop = map.get(&s.individual_id).ok_or_else(|| {
                Error::Lookup(format!("population for individual {}", s.individual_id))
            })?;
            s.population = Some(pop.clone());
        }
        Ok(())
    }

    /// Uses the family id column as the population label, the convention of
    /// the synthetic generator in this crate.
    pub fn populations_from_family_ids(&mut self) {
        for s in &mut self.samples {
            s.population = Some(s.family_id.clone());
        }
    }

    pub fn select_snps(&self, indices: &[usize]) -> Self {
        Self {
            matrix: self.matrix.select_snps(indices),
            samples: self.samples.clone(),
            snps: indices.iter().map(|&j| self.snps[j].clone()).collect(),
        }
    }
}

fn with_suffix(stem: &Path, ext: &str) -> PathBuf {
    let mut s: OsString = stem.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

fn read_lines(path: &Path) -> Result<Vec<(usize, String)>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push((i + 1, line));
    }
    Ok(out)
}

fn parse_error(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_owned(),
        line,
        msg: msg.into(),
    }
}

fn parse_fam(path: &Path) -> Result<Vec<SampleRecord>> {
    let mut samples = Vec::new();
    let mut seen = HashMap::new();
    for (line_no, line) in read_lines(path)? {
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 6 {
            return Err(parse_error(
                path,
                line_no,
                format!("expected 6 columns, found {}", fields.len()),
            ));
        }
        let phenotype_placeholder = fields[5]
            .parse::<i64>()
            .map_err(|_| parse_error(path, line_no, format!("bad phenotype '{}'", fields[5])))?;
        if let Some(prev) = seen.insert(fields[1].to_string(), line_no) {
            return Err(parse_error(
                path,
                line_no,
                format!("individual id '{}' already used on line {prev}", fields[1]),
            ));
        }
        samples.push(SampleRecord {
            family_id: fields[0].to_string(),
            individual_id: fields[1].to_string(),
            sex: Sex::from_code(fields[4]),
            phenotype_placeholder,
            population: None,
        });
    }
    Ok(samples)
}

fn parse_allele(path: &Path, line: usize, s: &str) -> Result<char> {
    let mut chars = s.chars();
    match (chars.next(), chars.next()) {
        (Some(c), None) => Ok(c),
        _ => Err(parse_error(
            path,
            line,
            format!("allele '{s}' is not a single character"),
        )),
    }
}

fn parse_bim(path: &Path) -> Result<Vec<SnpRecord>> {
    let mut snps = Vec::new();
    let mut seen = HashMap::new();
    for (line_no, line) in read_lines(path)? {
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 6 {
            return Err(parse_error(
                path,
                line_no,
                format!("expected 6 columns, found {}", fields.len()),
            ));
        }
        let genetic_distance = fields[2].parse::<f64>().map_err(|_| {
            parse_error(
                path,
                line_no,
                format!("bad genetic distance '{}'", fields[2]),
            )
        })?;
        let bp_position = fields[3]
            .parse::<u64>()
            .map_err(|_| parse_error(path, line_no, format!("bad position '{}'", fields[3])))?;
        if let Some(prev) = seen.insert(fields[1].to_string(), line_no) {
            return Err(parse_error(
                path,
                line_no,
                format!("SNP id '{}' already used on line {prev}", fields[1]),
            ));
        }
        snps.push(SnpRecord {
            chromosome: fields[0].to_string(),
            snp_id: fields[1].to_string(),
            genetic_distance,
            bp_position,
            allele1: parse_allele(path, line_no, fields[4])?,
            allele2: parse_allele(path, line_no, fields[5])?,
        });
    }
    Ok(snps)
}

fn decode_bed(path: &Path, bytes: &[u8], n: usize, m: usize) -> Result<GenotypeMatrix> {
    if bytes.len() < 3 || bytes[..2] != MAGIC {
        return Err(Error::Format {
            path: path.to_owned(),
            msg: "not a PLINK .bed file (bad magic bytes)".into(),
        });
    }
    if bytes[2] != SNP_MAJOR {
        return Err(Error::Format {
            path: path.to_owned(),
            msg: format!(
                "unsupported mode byte {:#04x}; only SNP-major (0x01) is supported",
                bytes[2]
            ),
        });
    }
    let block = n.div_ceil(4);
    let expected = 3 + (m * block) as u64;
    if bytes.len() as u64 != expected {
        return Err(Error::Truncated {
            path: path.to_owned(),
            expected,
            found: bytes.len() as u64,
        });
    }
    let mut data = Vec::with_capacity(n * m);
    for snp in bytes[3..].chunks_exact(block.max(1)).take(m) {
        for i in 0..n {
            let code = (snp[i / 4] >> (2 * (i % 4))) & 0b11;
            data.push(DECODE[code as usize]);
        }
    }
    GenotypeMatrix::from_snp_major(n, m, data)
}

/// Reads `<stem>.bed`, `<stem>.bim` and `<stem>.fam`.
pub fn read_genotype_triplet(stem: impl AsRef<Path>) -> Result<PlinkData> {
    let stem = stem.as_ref();
    let fam = with_suffix(stem, "fam");
    let bim = with_suffix(stem, "bim");
    let bed = with_suffix(stem, "bed");
    let samples = parse_fam(&fam)?;
    let snps = parse_bim(&bim)?;
    let bytes = fs::read(&bed).map_err(|e| Error::io(&bed, e))?;
    let matrix = decode_bed(&bed, &bytes, samples.len(), snps.len())?;
    Ok(PlinkData {
        matrix,
        samples,
        snps,
    })
}

fn encode_bed(matrix: &GenotypeMatrix) -> Vec<u8> {
    let n = matrix.n_individuals();
    let block = n.div_ceil(4);
    let mut out = Vec::with_capacity(3 + block * matrix.n_snps());
    out.extend_from_slice(&MAGIC);
    out.push(SNP_MAJOR);
    for col in matrix.columns() {
        for chunk in col.chunks(4) {
            let byte = chunk
                .iter()
                .enumerate()
                .fold(0u8, |acc, (k, &d)| acc | (encode(d) << (2 * k)));
            out.push(byte);
        }
    }
    out
}

fn write_file(
    path: &Path,
    f: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    f(&mut w)
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

pub fn write_genotype_triplet(data: &PlinkData, stem: impl AsRef<Path>) -> Result<()> {
    let stem = stem.as_ref();
    if data.matrix.n_individuals() != data.samples.len() || data.matrix.n_snps() != data.snps.len()
    {
        return Err(Error::InvalidInput(format!(
            "matrix is {} x {} but tables list {} samples and {} SNPs",
            data.matrix.n_individuals(),
            data.matrix.n_snps(),
            data.samples.len(),
            data.snps.len()
        )));
    }
    write_file(&with_suffix(stem, "fam"), |w| {
        for s in &data.samples {
            writeln!(
                w,
                "{} {} 0 0 {} {}",
                s.family_id,
                s.individual_id,
                s.sex.code(),
                s.phenotype_placeholder
            )?;
        }
        Ok(())
    })?;
    write_file(&with_suffix(stem, "bim"), |w| {
        for s in &data.snps {
            writeln!(
                w,
                "{}\t{}\t{}\t{}\t{}\t{}",
                s.chromosome, s.snp_id, s.genetic_distance, s.bp_position, s.allele1, s.allele2
            )?;
        }
        Ok(())
    })?;
    let bed = with_suffix(stem, "bed");
    fs::write(&bed, encode_bed(&data.matrix)).map_err(|e| Error::io(&bed, e))
}

/// Reads a whitespace-separated `individual_id population` table. An optional
/// header whose first field is `individual_id` and `#` comment lines are
/// skipped.
pub fn read_population_map(path: impl AsRef<Path>) -> Result<HashMap<String, String>> {
    let path = path.as_ref();
    let mut map = HashMap::new();
    for (line_no, line) in read_lines(path)? {
        if line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() < 2 {
            return Err(parse_error(
                path,
                line_no,
                "expected individual_id and population",
            ));
        }
        if fields[0] == "individual_id" {
            continue;
        }
        map.insert(fields[0].to_string(), fields[1].to_string());
    }
    Ok(map)
}
