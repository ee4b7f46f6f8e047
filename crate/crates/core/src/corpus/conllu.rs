//! Streaming CoNLL-U reader and writer for parsed requests.
//!
//! Requests are groups of consecutive sentences. A sentence carrying an
//! `# id = ...` comment that differs from the current request's id starts a
//! new request; sentences without one continue the current request. Request
//! metadata comes from `# domain = ...` and `# meta.<key> = ...` comments.
//! Multiword token ranges (`1-2`) and empty nodes (`1.1`) are skipped, as are
//! comment-only blocks without an id (file headers).

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Lines, Write};
use std::path::Path;

use super::{CorpusError, DepEdge, Domain, ParsedRequest, ParsedSentence, Result, Token};

#[derive(Debug, Default)]
struct SentenceBuf {
    id: Option<String>,
    domain: Option<Domain>,
    metadata: BTreeMap<String, String>,
    tokens: Vec<Token>,
    edges: Vec<DepEdge>,
    first_line: usize,
    has_content: bool,
}

/// Iterator over the requests of a CoNLL-U stream; memory use is bounded by
/// the size of one request.
pub struct ConlluReader<R> {
    lines: Lines<R>,
    source: String,
    line_no: usize,
    current: Option<ParsedRequest>,
    finished: bool,
}

impl ConlluReader<BufReader<File>> {
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path)?;
        Ok(ConlluReader::new(
            BufReader::new(file),
            path.display().to_string(),
        ))
    }
}

impl<R: BufRead> ConlluReader<R> {
    /// `source` names the input in error messages.
    pub fn new(reader: R, source: impl Into<String>) -> Self {
        ConlluReader {
            lines: reader.lines(),
            source: source.into(),
            line_no: 0,
            current: None,
            finished: false,
        }
    }

    fn malformed(&self, line: usize, message: impl Into<String>) -> CorpusError {
        CorpusError::Malformed {
            file: self.source.clone(),
            line,
            message: message.into(),
        }
    }

    /// Reads one sentence block. `Ok(None)` at end of input.
    fn read_sentence(&mut self) -> Result<Option<SentenceBuf>> {
        let mut buf = SentenceBuf::default();
        loop {
            let Some(line) = self.lines.next() else {
                return Ok(buf.has_content.then_some(buf));
            };
            let line = line?;
            self.line_no += 1;
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() {
                if buf.has_content {
                    return Ok(Some(buf));
                }
                continue;
            }
            if !buf.has_content {
                buf.first_line = self.line_no;
                buf.has_content = true;
            }
            if let Some(comment) = line.strip_prefix('#') {
                self.parse_comment(comment, &mut buf)?;
            } else {
                self.parse_token_line(line, &mut buf)?;
            }
        }
    }

    fn parse_comment(&self, comment: &str, buf: &mut SentenceBuf) -> Result<()> {
        let Some((key, value)) = comment.split_once('=') else {
            return Ok(());
        };
        let (key, value) = (key.trim(), value.trim());
        if key == "id" {
            buf.id = Some(value.to_string());
        } else if key == "domain" {
            let domain = value
                .parse()
                .map_err(|_| self.malformed(self.line_no, format!("unknown domain {value:?}")))?;
            buf.domain = Some(domain);
        } else if let Some(meta_key) = key.strip_prefix("meta.") {
            buf.metadata.insert(meta_key.to_string(), value.to_string());
        }
        Ok(())
    }

    fn parse_token_line(&self, line: &str, buf: &mut SentenceBuf) -> Result<()> {
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 10 {
            return Err(self.malformed(
                self.line_no,
                format!("expected 10 tab-separated columns, found {}", cols.len()),
            ));
        }
        if cols[0].contains('-') || cols[0].contains('.') {
            return Ok(());
        }
        let index: usize = cols[0]
            .parse()
            .map_err(|_| self.malformed(self.line_no, format!("bad token id {:?}", cols[0])))?;
        let lemma = match cols[2] {
            "_" if cols[1] != "_" => cols[1],
            l => l,
        };
        let token = Token::new(index, cols[1], lemma, cols[3])
            .map_err(|e| self.malformed(self.line_no, e.to_string()))?;
        buf.tokens.push(token);
        if cols[6] != "_" {
            let head: usize = cols[6]
                .parse()
                .map_err(|_| self.malformed(self.line_no, format!("bad head {:?}", cols[6])))?;
            buf.edges.push(DepEdge::new(cols[7], head, index));
        }
        Ok(())
    }

    fn next_request(&mut self) -> Result<Option<ParsedRequest>> {
        if self.finished {
            return Ok(None);
        }
        loop {
            let Some(buf) = self.read_sentence()? else {
                self.finished = true;
                return Ok(self.current.take());
            };
            let first_line = buf.first_line;
            if buf.id.is_none() && buf.tokens.is_empty() {
                // comment-only block, such as a file header
                continue;
            }
            let starts_new = match (&buf.id, &self.current) {
                (Some(id), Some(cur)) => *id != cur.id,
                (Some(_), None) => true,
                (None, Some(_)) => false,
                (None, None) => {
                    return Err(self.malformed(first_line, "sentence without a `# id = ...` comment"))
                }
            };
            let sentence = if buf.tokens.is_empty() {
                None
            } else {
                Some(
                    ParsedSentence::new(buf.tokens, buf.edges)
                        .map_err(|e| self.malformed(first_line, e.to_string()))?,
                )
            };
            let mut finished_request = None;
            if starts_new {
                let fresh = ParsedRequest {
                    id: buf.id.clone().unwrap_or_default(),
                    domain: buf.domain.unwrap_or_default(),
                    sentences: Vec::new(),
                    metadata: BTreeMap::new(),
                };
                finished_request = self.current.replace(fresh);
            }
            let cur = self.current.as_mut().expect("current request");
            if let Some(domain) = buf.domain {
                cur.domain = domain;
            }
            cur.metadata.extend(buf.metadata);
            cur.sentences.extend(sentence);
            if finished_request.is_some() {
                return Ok(finished_request);
            }
        }
    }
}

impl<R: BufRead> Iterator for ConlluReader<R> {
    type Item = Result<ParsedRequest>;

    fn next(&mut self) -> Option<Self::Item> {
        match self.next_request() {
            Ok(r) => r.map(Ok),
            Err(e) => {
                self.finished = true;
                Some(Err(e))
            }
        }
    }
}

/// Reads a whole CoNLL-U file into memory.
pub fn read_file(path: impl AsRef<Path>) -> Result<Vec<ParsedRequest>> {
    ConlluReader::open(path)?.collect()
}

/// Parses CoNLL-U text held in memory.
pub fn parse_str(text: &str) -> Result<Vec<ParsedRequest>> {
    ConlluReader::new(text.as_bytes(), "<string>").collect()
}

/// Writes one request; the output reads back to an equal request.
pub fn write_request<W: Write>(w: &mut W, request: &ParsedRequest) -> std::io::Result<()> {
    for (i, sentence) in request.sentences.iter().enumerate() {
        if i == 0 {
            writeln!(w, "# id = {}", request.id)?;
            writeln!(w, "# domain = {}", request.domain)?;
            for (k, v) in &request.metadata {
                writeln!(w, "# meta.{k} = {v}")?;
            }
        }
        let text: Vec<&str> = sentence.tokens().iter().map(|t| t.surface.as_str()).collect();
        writeln!(w, "# text = {}", text.join(" "))?;
        let mut heads = vec![None; sentence.len() + 1];
        for e in sentence.edges() {
            heads[e.dependent] = Some(e);
        }
        for t in sentence.tokens() {
            let (head, rel) = match heads[t.index] {
                Some(e) => (e.head.to_string(), e.relation.as_str()),
                None => ("_".to_string(), "_"),
            };
            writeln!(
                w,
                "{}\t{}\t{}\t{}\t_\t_\t{}\t{}\t_\t_",
                t.index, t.surface, t.lemma, t.upos, head, rel
            )?;
        }
        writeln!(w)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "\
# id = r1
# domain = wiki
# meta.role = admin
# text = Hi there .
1\tHi\thi\tINTJ\t_\t_\t0\troot\t_\t_
2\tthere\tthere\tADV\t_\t_\t1\tadvmod\t_\t_
3\t.\t.\tPUNCT\t_\t_\t1\tpunct\t_\t_

# text = Could you help ?
1\tCould\tcould\tAUX\t_\t_\t3\taux\t_\t_
2\tyou\tyou\tPRON\t_\t_\t3\tnsubj\t_\t_
3\thelp\thelp\tVERB\t_\t_\t0\troot\t_\t_
4\t?\t?\tPUNCT\t_\t_\t3\tpunct\t_\t_

# id = r2
# domain = se
1-2\tdon't\t_\t_\t_\t_\t_\t_\t_\t_
1\tdo\tdo\tAUX\t_\t_\t0\troot\t_\t_
2\tn't\tnot\tPART\t_\t_\t1\tadvmod\t_\t_
";

    #[test]
    fn reads_requests() {
        let reqs = parse_str(SAMPLE).unwrap();
        assert_eq!(reqs.len(), 2);
        assert_eq!(reqs[0].id, "r1");
        assert_eq!(reqs[0].domain, Domain::Wiki);
        assert_eq!(reqs[0].metadata["role"], "admin");
        assert_eq!(reqs[0].sentences.len(), 2);
        assert!(reqs[0].is_canonical());
        assert_eq!(reqs[0].sentences[1].edges()[1], DepEdge::new("nsubj", 3, 2));
        assert_eq!(reqs[1].domain, Domain::SE);
        assert_eq!(reqs[1].sentences[0].len(), 2);
    }

    #[test]
    fn header_block_is_skipped() {
        let text = "# parser = x 1.0\n# scheme = ud\n\n# id = a\n1\tx\tx\tX\t_\t_\t0\troot\t_\t_\n";
        let reqs = parse_str(text).unwrap();
        assert_eq!(reqs.len(), 1);
        assert_eq!(reqs[0].id, "a");
        // a token line before any id is still an error
        assert!(parse_str("1\tx\tx\tX\t_\t_\t0\troot\t_\t_\n").is_err());
    }

    #[test]
    fn repeated_id_continues_request() {
        let text = "# id = a\n1\tx\tx\tX\t_\t_\t0\troot\t_\t_\n\n# id = a\n1\ty\ty\tX\t_\t_\t0\troot\t_\t_\n";
        let reqs = parse_str(text).unwrap();
        assert_eq!(reqs.len(), 1);
        assert_eq!(reqs[0].sentences.len(), 2);
    }

    #[test]
    fn malformed_line_reports_location() {
        let text = "# id = a\n1\tx\tx\tX\t_\t_\t0\troot\t_\t_\n2\tbroken line\n";
        let err = parse_str(text).unwrap_err();
        match err {
            CorpusError::Malformed { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        let err = parse_str("1\tx\tx\tX\t_\t_\t0\troot\t_\t_\n").unwrap_err();
        assert!(err.to_string().contains("<string>:1"));
    }

    #[test]
    fn round_trip() {
        let reqs = parse_str(SAMPLE).unwrap();
        let mut out = Vec::new();
        for r in &reqs {
            write_request(&mut out, r).unwrap();
        }
        let again = parse_str(std::str::from_utf8(&out).unwrap()).unwrap();
        assert_eq!(reqs, again);
    }
}
